#include "fpp/phi_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "fpp/csv.hpp"
#include "fpp/error.hpp"
#include "fpp/quadrature.hpp"

namespace fpp {

PhiFunction phi_fractional(double hurst, double lambda, double m1) {
  return PhiFunction::fractional(hurst, lambda, m1);
}

namespace {

constexpr double kCellRelTol = 1e-10;
constexpr double kTiny = 1e-300;
constexpr double kSingularGuard = 1e-14;

// Solution u = phi * lambda at the reported nodes.
struct Nodal {
  std::vector<double> nodes;
  std::vector<double> u;
};

// Weights of one cell against its two hat functions: left multiplies the
// unknown at the cell's left node, right the one at its right node.
struct Pair {
  double left = 0.0;
  double right = 0.0;
};

enum class Rule { adaptive, gauss, sampled };

// Quadrature for cell j in row i. The rule depends only on the distance to
// the diagonal (and on j near the origin) so that its truncation error varies
// smoothly from row to row; a first-kind solve amplifies row-to-row jumps.
Rule pick_rule(std::size_t i, std::size_t j, const VolterraOptions& o) {
  if (i - j <= o.near_band) return Rule::adaptive;
  if (i - j <= o.gauss_band || j <= o.near_band) return Rule::gauss;
  return Rule::sampled;
}

// Offsets of the two Gauss points of a cell of width h from its midpoint.
constexpr double kGaussOffset = 0.28867513459481288225;  // 1 / (2 sqrt 3)

// int_a^b w(s) L_q(s) ds where L_0, L_1 are the Lagrange basis of the two
// Gauss points of [a, b].
template <class W>
std::array<double, 2> sampled_weights(W&& w, double a, double b) {
  const double h = b - a;
  const double s0 = 0.5 * (a + b) - kGaussOffset * h;
  const double s1 = 0.5 * (a + b) + kGaussOffset * h;
  return {quad::gauss_legendre<8>([&](double s) { return w(s) * (s1 - s) / (s1 - s0); }, a, b),
          quad::gauss_legendre<8>([&](double s) { return w(s) * (s - s0) / (s1 - s0); }, a, b)};
}

void check_inputs(const KernelSpec& kernel, const IntensitySpec& intensity, double m1,
                  std::span<const double> grid) {
  if (!(m1 > 0.0)) fail(ErrorKind::domain, "mark mean m1 must be positive");
  if (grid.empty()) fail(ErrorKind::domain, "Volterra grid is empty");
  if (!(grid.front() > 0.0)) fail(ErrorKind::domain, "Volterra grid must start above 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) fail(ErrorKind::domain, "Volterra grid must increase");
  }
  const double gk = kernel.origin_exponent();
  if (!(std::max(2.0 * gk, gk + intensity.origin_exponent()) < 1.0)) {
    fail(ErrorKind::domain, "kernel and intensity too singular at the origin");
  }
}

void check_pivot(double w, std::size_t row) {
  if (!(std::abs(w) >= kSingularGuard)) {
    fail(ErrorKind::singular_system,
         "Volterra diagonal weight " + csv::format(w) + " at node " + std::to_string(row) +
             " is below 1e-14; the kernel is too degenerate near the diagonal for this grid");
  }
}

// Kernels vanishing on the diagonal: g = phi s^gamma is constant on each cell
// (0, x_0], (x_{j-1}, x_j]; the unknowns sit at the cell midpoints.
Nodal solve_cellwise_constant(const KernelSpec& kernel, double m1, const std::vector<double>& x,
                              const VolterraOptions& options) {
  const std::size_t n = x.size();
  const double gamma = kernel.origin_exponent();
  const double alpha = kernel.diagonal_exponent();
  const double origin_gamma = 2.0 * gamma;

  std::vector<double> lower(n), mid(n);
  std::vector<std::array<double, 2>> far(n);
  for (std::size_t j = 0; j < n; ++j) {
    lower[j] = j == 0 ? 0.0 : x[j - 1];
    mid[j] = 0.5 * (lower[j] + x[j]);
    if (j > 0) {
      far[j] = sampled_weights(
          [&](double s) { return m1 * std::pow(s, -gamma); }, lower[j], x[j]);
    }
  }

  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = x[i];
    auto f = [&](double s) { return m1 * kernel(t, s) * std::pow(s, -gamma); };
    double rhs = t;
    if (i > 0) {
      rhs -= quad::origin_singular(f, x[0], origin_gamma, kCellRelTol, kTiny).value * g[0];
    }
    for (std::size_t j = 1; j < i; ++j) {
      double w;
      const Rule rule = pick_rule(i, j, options);
      if (rule == Rule::adaptive) {
        w = quad::adaptive(f, lower[j], x[j], kCellRelTol, kTiny).value;
      } else if (rule == Rule::gauss) {
        w = quad::gauss_legendre<4>(f, lower[j], x[j]);
      } else {
        const double h = x[j] - lower[j];
        w = kernel(t, mid[j] - kGaussOffset * h) * far[j][0] +
            kernel(t, mid[j] + kGaussOffset * h) * far[j][1];
      }
      rhs -= w * g[j];
    }
    double diag;
    if (i == 0) {
      const double half = 0.5 * t;
      diag = quad::origin_singular(f, half, origin_gamma, kCellRelTol, kTiny).value +
             quad::diagonal_singular(f, half, t, alpha, kCellRelTol, kTiny).value;
    } else {
      diag = quad::diagonal_singular(f, lower[i], t, alpha, kCellRelTol, kTiny).value;
    }
    check_pivot(diag, i);
    g[i] = rhs / diag;
  }

  Nodal out{mid, std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) out.u[j] = g[j] * std::pow(mid[j], -gamma);
  return out;
}

// Kernels with K(t,t) != 0: g = phi s^gamma is linear between the nodes and
// continues its first segment down to 0; the unknowns are the nodal values.
// The first two rows share the unknowns of the origin piece and form a 2x2
// block.
Nodal solve_nodal_linear(const KernelSpec& kernel, double m1, const std::vector<double>& x,
                         const VolterraOptions& options) {
  const std::size_t n = x.size();
  const double gamma = kernel.origin_exponent();
  const double alpha = kernel.diagonal_exponent();
  const double origin_gamma = 2.0 * gamma;
  const double x1 = n > 1 ? x[1] : 2.0 * x[0];
  const double h1 = x1 - x[0];
  auto weight = [&](double s) { return m1 * std::pow(s, -gamma); };

  // Sampled cells interpolate K linearly through the two Gauss points of the
  // cell; far_w[c][q] holds the weights of point q against the left and
  // right hat functions.
  std::vector<std::array<Pair, 2>> far_w(n);
  for (std::size_t c = 1; c < n; ++c) {
    const double a = x[c - 1];
    const double b = x[c];
    const double h = b - a;
    const auto l = sampled_weights([&](double s) { return weight(s) * (b - s) / h; }, a, b);
    const auto r = sampled_weights([&](double s) { return weight(s) * (s - a) / h; }, a, b);
    far_w[c][0] = {l[0], r[0]};
    far_w[c][1] = {l[1], r[1]};
  }

  std::vector<double> g(n);
  double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = x[i];
    auto k = [&](double s) { return kernel(t, s) * weight(s); };

    Pair origin;
    {
      auto fl = [&](double s) { return k(s) * (x1 - s) / h1; };
      auto fr = [&](double s) { return k(s) * (s - x[0]) / h1; };
      if (i == 0) {
        const double half = 0.5 * t;
        origin.left = quad::origin_singular(fl, half, origin_gamma, kCellRelTol, kTiny).value +
                      quad::diagonal_singular(fl, half, t, alpha, kCellRelTol, kTiny).value;
        origin.right = quad::origin_singular(fr, half, origin_gamma, kCellRelTol, kTiny).value +
                       quad::diagonal_singular(fr, half, t, alpha, kCellRelTol, kTiny).value;
      } else {
        origin.left = quad::origin_singular(fl, x[0], origin_gamma, kCellRelTol, kTiny).value;
        origin.right = quad::origin_singular(fr, x[0], origin_gamma, kCellRelTol, kTiny).value;
      }
      if (n == 1) {
        origin.left += origin.right;
        origin.right = 0.0;
      }
    }

    double known = 0.0;
    double pivot = 0.0;
    for (std::size_t c = 1; c <= i; ++c) {
      const double a = x[c - 1];
      const double b = x[c];
      const double h = b - a;
      auto fl = [&](double s) { return k(s) * (b - s) / h; };
      auto fr = [&](double s) { return k(s) * (s - a) / h; };
      Pair w;
      if (c == i) {
        w.left = quad::diagonal_singular(fl, a, t, alpha, kCellRelTol, kTiny).value;
        w.right = quad::diagonal_singular(fr, a, t, alpha, kCellRelTol, kTiny).value;
      } else if (const Rule rule = pick_rule(i, c, options); rule == Rule::adaptive) {
        w.left = quad::adaptive(fl, a, b, kCellRelTol, kTiny).value;
        w.right = quad::adaptive(fr, a, b, kCellRelTol, kTiny).value;
      } else if (rule == Rule::gauss) {
        w.left = quad::gauss_legendre<4>(fl, a, b);
        w.right = quad::gauss_legendre<4>(fr, a, b);
      } else {
        const double k0 = kernel(t, 0.5 * (a + b) - kGaussOffset * h);
        const double k1 = kernel(t, 0.5 * (a + b) + kGaussOffset * h);
        w.left = k0 * far_w[c][0].left + k1 * far_w[c][1].left;
        w.right = k0 * far_w[c][0].right + k1 * far_w[c][1].right;
      }
      if (i == 1) {
        a10 += w.left;
        a11 += w.right;
      } else {
        known += w.left * g[c - 1];
        if (c == i) {
          pivot = w.right;
        } else {
          known += w.right * g[c];
        }
      }
    }

    if (i == 0) {
      a00 = origin.left;
      a01 = origin.right;
      if (n == 1) {
        check_pivot(a00, 0);
        g[0] = t / a00;
      }
    } else if (i == 1) {
      a10 += origin.left;
      a11 += origin.right;
      const double det = a00 * a11 - a01 * a10;
      const double scale = std::abs(a00 * a11) + std::abs(a01 * a10);
      if (!(scale > 0.0) || !(std::abs(det) >= kSingularGuard * scale)) {
        fail(ErrorKind::singular_system,
             "Volterra starting block is singular (determinant " + csv::format(det) + ")");
      }
      g[0] = (x[0] * a11 - a01 * x[1]) / det;
      g[1] = (a00 * x[1] - a10 * x[0]) / det;
    } else {
      known += origin.left * g[0] + origin.right * g[1];
      check_pivot(pivot, i);
      g[i] = (t - known) / pivot;
    }
  }

  Nodal out{x, std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) out.u[j] = g[j] * std::pow(x[j], -gamma);
  return out;
}

}  // namespace

VolterraSolution solve_phi_volterra_detailed(const KernelSpec& kernel,
                                             const IntensitySpec& intensity, double m1,
                                             std::span<const double> grid,
                                             const VolterraOptions& options) {
  check_inputs(kernel, intensity, m1, grid);
  const std::vector<double> x(grid.begin(), grid.end());
  const std::size_t n = x.size();
  // The equation involves phi only through u = phi * lambda, so u is solved
  // for and divided by the intensity afterwards.
  Nodal sol_u = kernel.diagonal_degenerate() ? solve_cellwise_constant(kernel, m1, x, options)
                                             : solve_nodal_linear(kernel, m1, x, options);
  std::vector<double> values(sol_u.nodes.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    values[j] = sol_u.u[j] / intensity(sol_u.nodes[j]);
  }
  // A varying intensity stays a divisor of the interpolant, so phi * lambda
  // keeps the solved shape between and below the nodes.
  const double gamma = kernel.origin_exponent();
  VolterraSolution sol{
      intensity.kind() == IntensitySpec::Kind::constant
          ? PhiFunction::grid(sol_u.nodes, std::move(values), gamma, x.back())
          : PhiFunction::grid_divided(sol_u.nodes, std::move(values),
                                      [intensity](double s) { return intensity(s); },
                                      intensity.base_rate(), gamma, x.back()),
      {}, {}, 0.0};

  std::vector<std::size_t> rows;
  if (options.residual_checks == 0 || options.residual_checks >= n) {
    for (std::size_t i = 0; i < n; ++i) rows.push_back(i);
  } else {
    const std::size_t m = std::max<std::size_t>(options.residual_checks, 2);
    for (std::size_t q = 0; q < m; ++q) rows.push_back(q * (n - 1) / (m - 1));
    rows.push_back(1);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  }
  // Collocation satisfies the node equations by construction up to the
  // weight quadrature, so each checked node is paired with the point halfway
  // to its predecessor, where the interpolation error shows.
  auto check = [&](double t) {
    const double r = std::abs(calibration_residual(kernel, intensity, m1, sol.phi, t)) / t;
    sol.check_nodes.push_back(t);
    sol.relative_residuals.push_back(r);
    sol.max_relative_residual = std::max(sol.max_relative_residual, r);
  };
  for (std::size_t i : rows) {
    if (i > 0) check(0.5 * (x[i - 1] + x[i]));
    check(x[i]);
  }
  if (!(sol.max_relative_residual <= 2.0 * options.tolerance)) {
    fail(ErrorKind::non_convergence,
         "Volterra residual check failed: max relative residual " +
             csv::format(sol.max_relative_residual) + " exceeds 2 x tolerance " +
             csv::format(options.tolerance));
  }
  return sol;
}

PhiFunction solve_phi_volterra(const KernelSpec& kernel, const IntensitySpec& intensity,
                               double m1, std::span<const double> grid,
                               const VolterraOptions& options) {
  return solve_phi_volterra_detailed(kernel, intensity, m1, grid, options).phi;
}

double calibration_residual(const KernelSpec& kernel, const IntensitySpec& intensity, double m1,
                            const PhiFunction& phi, double t) {
  if (!(t > 0.0)) fail(ErrorKind::domain, "calibration residual needs t > 0");
  auto integrand = [&](double s) { return kernel(t, s) * phi(s) * intensity(s); };
  const double origin = kernel.origin_exponent() + phi.origin_exponent() + intensity.origin_exponent();
  const double alpha = kernel.diagonal_exponent();

  const auto* g = std::get_if<PhiFunction::Grid>(&phi.repr());
  if (g == nullptr) {
    return m1 * kernel_weighted_integral(
                    kernel, t, [&](double s) { return phi(s) * intensity(s); },
                    phi.origin_exponent() + intensity.origin_exponent(), 1e-10) -
           t;
  }
  // Breakpoints of the interpolant below t.
  std::vector<double> cuts;
  for (double x : g->nodes) {
    if (x < t) cuts.push_back(x);
  }
  double total = 0.0;
  if (cuts.empty()) {
    const double half = 0.5 * t;
    total += quad::origin_singular(integrand, half, origin, 1e-10, kTiny).value;
    total += quad::diagonal_singular(integrand, half, t, alpha, 1e-10, kTiny).value;
    return m1 * total - t;
  }
  total += quad::origin_singular(integrand, cuts.front(), origin, 1e-10, kTiny).value;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    const double len = hi - lo;
    if (t - hi < 16.0 * len || lo < 16.0 * len) {
      total += quad::adaptive(integrand, lo, hi, 1e-10, kTiny).value;
    } else {
      total += quad::gauss_legendre<8>(integrand, lo, hi);
    }
  }
  total += quad::diagonal_singular(integrand, cuts.back(), t, alpha, 1e-10, kTiny).value;
  return m1 * total - t;
}

void write_csv(std::ostream& out, const PhiFunction& phi) {
  const auto* g = std::get_if<PhiFunction::Grid>(&phi.repr());
  if (g == nullptr) fail(ErrorKind::io, "only grid phi functions serialize to CSV");
  out << "s,phi\n";
  for (std::size_t i = 0; i < g->nodes.size(); ++i) {
    csv::write_row(out, {g->nodes[i], g->values[i]});
  }
}

PhiFunction read_phi_csv(std::istream& in, double origin_exponent) {
  std::vector<double> nodes;
  std::vector<double> values;
  for (const auto& row : csv::read_table(in, "s,phi")) {
    nodes.push_back(row[0]);
    values.push_back(row[1]);
  }
  return PhiFunction::grid(std::move(nodes), std::move(values), origin_exponent);
}

}  // namespace fpp
