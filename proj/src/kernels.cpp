#include "fpp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <set>

#include "fpp/csv.hpp"
#include "fpp/error.hpp"
#include "fpp/quadrature.hpp"
#include "fpp/special_functions.hpp"

namespace fpp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kSeriesEps = 1e-17;

// Sum of the Gauss series with term ratio r(n) * x, for x <= 1/2.
template <class Ratio>
double geometric_series(Ratio ratio, double x) {
  double sum = 1.0;
  double term = 1.0;
  for (int n = 0; n < 200; ++n) {
    term *= ratio(static_cast<double>(n)) * x;
    sum += term;
    if (std::abs(term) <= kSeriesEps * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

// With a = H-1/2, b = 1/2-H, c = H+1/2 and z = 1 - t/s, the Pfaff transform
// on b gives F(a,b;c;z) = (t/s)^{H-1/2} F(1, 1/2-H; H+1/2; w), w = 1 - s/t.
// For w > 1/2 the Pfaff transform on a and the 1-w connection formula give,
// with x = s/t,
//   F(a,b;c;z) = (t/s)^{1/2-H} [A (1-x)^{1/2-H} + B x^{1-2H} F(1, 1/2-H; 2-2H; x)]
// where A = G(H+1/2)G(1-2H)/G(1/2-H), B = G(H+1/2)G(2H-1)/(G(H-1/2)G(2H)).
FractionalKernel::FractionalKernel(double h) : hurst(h), alpha(h - 0.5) {
  if (!(h > 0.5 && h < 1.0)) {
    fail(ErrorKind::domain, "fractional kernel needs H in (1/2, 1), got " + std::to_string(h));
  }
  inv_gamma = 1.0 / std::tgamma(h + 0.5);
  conn_regular = std::tgamma(h + 0.5) * std::tgamma(1.0 - 2.0 * h) / std::tgamma(0.5 - h);
  conn_singular =
      std::tgamma(h + 0.5) * std::tgamma(2.0 * h - 1.0) / (std::tgamma(h - 0.5) * std::tgamma(2.0 * h));
}

double FractionalKernel::operator()(double t, double s) const {
  if (!(s > 0.0)) fail(ErrorKind::domain, "fractional kernel needs s > 0");
  if (s >= t) return 0.0;
  const double x = s / t;
  const double w = 1.0 - x;
  const double b = 0.5 - hurst;
  if (w <= 0.5) {
    const double f = geometric_series(
        [&](double n) { return (b + n) / (hurst + 0.5 + n); }, w);
    // (t-s)^alpha (t/s)^alpha
    return inv_gamma * std::pow((t - s) / x, alpha) * f;
  }
  const double f2 = geometric_series(
      [&](double n) { return (b + n) / (2.0 - 2.0 * hurst + n); }, x);
  // (t-s)^alpha (s/t)^alpha [A (1-x)^{-alpha} + B x^{-2 alpha} F2]
  const double regular = conn_regular * std::pow(s, alpha);
  const double singular = conn_singular * std::pow((t - s) * x, alpha) * std::pow(x, -2.0 * alpha) * f2;
  return inv_gamma * (regular + singular);
}

KernelSpec KernelSpec::exp_shot_noise(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    fail(ErrorKind::domain, "exp_shot_noise needs a positive rate");
  }
  return KernelSpec(ExpShotNoiseKernel{rate});
}

KernelSpec KernelSpec::fractional(double hurst) { return KernelSpec(FractionalKernel(hurst)); }

KernelSpec KernelSpec::tabulated(TabulatedKernel table) {
  const auto nt = table.t_grid.size();
  const auto ns = table.s_grid.size();
  if (nt < 2 || ns < 2 || table.values.size() != nt * ns) {
    fail(ErrorKind::domain, "tabulated kernel needs at least a 2x2 grid with matching values");
  }
  if (!std::is_sorted(table.t_grid.begin(), table.t_grid.end()) ||
      !std::is_sorted(table.s_grid.begin(), table.s_grid.end()) ||
      std::adjacent_find(table.t_grid.begin(), table.t_grid.end()) != table.t_grid.end() ||
      std::adjacent_find(table.s_grid.begin(), table.s_grid.end()) != table.s_grid.end()) {
    fail(ErrorKind::domain, "tabulated kernel grids must be strictly increasing");
  }
  return KernelSpec(std::move(table));
}

namespace {

double tabulated_eval(const TabulatedKernel& k, double t, double s) {
  if (s > t) return 0.0;
  const auto& tg = k.t_grid;
  const auto& sg = k.s_grid;
  if (t < tg.front() || t > tg.back() || s < sg.front() || s > sg.back()) {
    fail(ErrorKind::domain, "tabulated kernel evaluated outside its grid");
  }
  auto bracket = [](const std::vector<double>& g, double x) {
    auto hi = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin());
    hi = std::clamp<std::size_t>(hi, 1, g.size() - 1);
    const std::size_t lo = hi - 1;
    return std::pair{lo, (x - g[lo]) / (g[hi] - g[lo])};
  };
  const auto [i, u] = bracket(tg, t);
  const auto [j, v] = bracket(sg, s);
  const std::size_t ns = sg.size();
  // Corners above the diagonal take the row's last value on or below it, so
  // cells cut by the diagonal do not blend in the zero upper triangle.
  auto at = [&](std::size_t a, std::size_t b) {
    while (sg[b] > tg[a]) {
      if (b == 0) return 0.0;
      --b;
    }
    return k.values[a * ns + b];
  };
  return (1 - u) * (1 - v) * at(i, j) + u * (1 - v) * at(i + 1, j) + (1 - u) * v * at(i, j + 1) +
         u * v * at(i + 1, j + 1);
}

}  // namespace

double KernelSpec::operator()(double t, double s) const {
  return std::visit(overloaded{
                        [t, s](const IndicatorKernel&) { return s <= t ? 1.0 : 0.0; },
                        [t, s](const ExpShotNoiseKernel& k) {
                          return s <= t ? std::exp(-k.rate * (t - s)) : 0.0;
                        },
                        [t, s](const FractionalKernel& k) { return k(t, s); },
                        [t, s](const TabulatedKernel& k) { return tabulated_eval(k, t, s); },
                    },
                    repr_);
}

bool KernelSpec::diagonal_degenerate() const {
  return std::visit(overloaded{
                        [](const IndicatorKernel&) { return false; },
                        [](const ExpShotNoiseKernel&) { return false; },
                        [](const FractionalKernel&) { return true; },
                        [this](const TabulatedKernel& k) {
                          for (double t : k.t_grid) {
                            if (t < k.s_grid.front() || t > k.s_grid.back()) continue;
                            if ((*this)(t, t) != 0.0) return false;
                          }
                          return true;
                        },
                    },
                    repr_);
}

double KernelSpec::origin_exponent() const {
  if (const auto* f = std::get_if<FractionalKernel>(&repr_)) return f->alpha;
  return 0.0;
}

double KernelSpec::diagonal_exponent() const {
  if (const auto* f = std::get_if<FractionalKernel>(&repr_)) return f->alpha;
  return 0.0;
}

std::string KernelSpec::name() const {
  return std::visit(overloaded{
                        [](const IndicatorKernel&) { return std::string("indicator"); },
                        [](const ExpShotNoiseKernel&) { return std::string("exp_shot_noise"); },
                        [](const FractionalKernel&) { return std::string("fractional"); },
                        [](const TabulatedKernel&) { return std::string("tabulated"); },
                    },
                    repr_);
}

double kernel_eval(const KernelSpec& kernel, double t, double s) {
  if (!(t > 0.0)) fail(ErrorKind::domain, "kernel_eval needs t > 0");
  return kernel(t, s);
}

PathRegularity diagonal_class(const KernelSpec& kernel) {
  if (kernel.diagonal_degenerate()) return PathRegularity::continuous_paths;
  if (const auto* tab = std::get_if<TabulatedKernel>(&kernel.repr())) {
    for (double t : tab->t_grid) {
      if (t < tab->s_grid.front() || t > tab->s_grid.back()) continue;
      if (!std::isfinite(kernel(t, t))) return PathRegularity::irregular;
    }
  }
  return PathRegularity::cadlag_paths;
}

std::string to_string(PathRegularity regularity) {
  switch (regularity) {
    case PathRegularity::continuous_paths: return "continuous_paths";
    case PathRegularity::cadlag_paths: return "cadlag_paths";
    case PathRegularity::irregular: return "irregular";
  }
  return "irregular";
}

double kernel_weighted_integral(const KernelSpec& kernel, double t,
                                const std::function<double(double)>& weight,
                                double weight_exponent, double rel_tol) {
  if (!(t > 0.0)) fail(ErrorKind::domain, "kernel integral needs t > 0");
  auto integrand = [&](double s) { return kernel(t, s) * weight(s); };
  const double gamma = kernel.origin_exponent() + weight_exponent;
  if (!(gamma < 1.0)) fail(ErrorKind::domain, "kernel integral diverges at the origin");
  const double mid = 0.5 * t;
  const double abs_tol = 1e-300;
  const double left = quad::origin_singular(integrand, mid, gamma, rel_tol, abs_tol).value;
  const double right =
      quad::diagonal_singular(integrand, mid, t, kernel.diagonal_exponent(), rel_tol, abs_tol).value;
  return left + right;
}

double kernel_lambda_integral(const KernelSpec& kernel, const IntensitySpec& intensity, double t) {
  return kernel_weighted_integral(kernel, t, [&](double s) { return intensity(s); },
                                  intensity.origin_exponent(), 1e-10);
}

KernelSpec read_tabulated_kernel_csv(std::istream& in) {
  const auto rows = csv::read_table(in, "t,s,value");
  std::set<double> ts;
  std::set<double> ss;
  std::map<std::pair<double, double>, double> cells;
  for (const auto& r : rows) {
    ts.insert(r[0]);
    ss.insert(r[1]);
    if (!cells.emplace(std::pair{r[0], r[1]}, r[2]).second) {
      fail(ErrorKind::io, "tabulated kernel CSV repeats a (t,s) cell");
    }
  }
  TabulatedKernel table;
  table.t_grid.assign(ts.begin(), ts.end());
  table.s_grid.assign(ss.begin(), ss.end());
  table.values.assign(table.t_grid.size() * table.s_grid.size(), 0.0);
  for (std::size_t i = 0; i < table.t_grid.size(); ++i) {
    for (std::size_t j = 0; j < table.s_grid.size(); ++j) {
      const double t = table.t_grid[i];
      const double s = table.s_grid[j];
      const auto it = cells.find({t, s});
      if (it != cells.end()) {
        table.values[i * table.s_grid.size() + j] = it->second;
      } else if (s <= t) {
        fail(ErrorKind::io, "tabulated kernel CSV misses the cell t=" + csv::format(t) +
                                ", s=" + csv::format(s));
      }
    }
  }
  return KernelSpec::tabulated(std::move(table));
}

}  // namespace fpp
