#include "fpp/phi_function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

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

// Weighted value g = phi * s^gamma at node i.
double scaled_value(const PhiFunction::Grid& g, std::size_t i) {
  const double v = g.values[i] * std::pow(g.nodes[i], g.origin_exponent);
  return g.divisor ? v * (*g.divisor)(g.nodes[i]) : v;
}

double divisor_at(const PhiFunction::Grid& g, double s) {
  return g.divisor ? (*g.divisor)(s) : 1.0;
}

// g(s) on the grid: linear between nodes, continued linearly below the first
// node and held constant past the last.
double scaled_at(const PhiFunction::Grid& g, double s) {
  const auto& x = g.nodes;
  if (s <= x.front()) {
    if (x.size() == 1) return scaled_value(g, 0);
    const double w = (s - x[0]) / (x[1] - x[0]);
    return (1.0 - w) * scaled_value(g, 0) + w * scaled_value(g, 1);
  }
  if (s >= x.back()) return scaled_value(g, x.size() - 1);
  const auto it = std::upper_bound(x.begin(), x.end(), s);
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double w = (s - x[lo]) / (x[hi] - x[lo]);
  return (1.0 - w) * scaled_value(g, lo) + w * scaled_value(g, hi);
}

// int_a^b s^{-gamma} (p + q s) ds
double power_linear_integral(double p, double q, double gamma, double a, double b) {
  const double e1 = 1.0 - gamma;
  const double e2 = 2.0 - gamma;
  auto pw = [](double s, double e) { return s == 0.0 ? 0.0 : std::pow(s, e); };
  return p * (pw(b, e1) - pw(a, e1)) / e1 + q * (pw(b, e2) - pw(a, e2)) / e2;
}

double grid_integral(const PhiFunction::Grid& g, double a, double b) {
  const auto& x = g.nodes;
  const double gamma = g.origin_exponent;
  // Breakpoints of the piecewise-linear g inside [a, b].
  std::vector<double> cuts{a};
  for (double xi : x) {
    if (xi > a && xi < b) cuts.push_back(xi);
  }
  cuts.push_back(b);
  auto phi = [&g, gamma](double s) {
    return scaled_at(g, s) * std::pow(s, -gamma) / divisor_at(g, s);
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    if (hi <= lo) continue;
    if (g.divisor) {
      total += lo == 0.0 ? quad::origin_singular(phi, hi, gamma, 1e-12, 1e-300).value
                         : quad::adaptive(phi, lo, hi, 1e-12, 1e-300).value;
      continue;
    }
    const double g_lo = scaled_at(g, lo);
    const double g_hi = scaled_at(g, hi);
    const double q = (g_hi - g_lo) / (hi - lo);
    const double p = g_lo - q * lo;
    total += power_linear_integral(p, q, gamma, lo, hi);
  }
  return total;
}

void check_interval(const PhiFunction& phi, double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) {
    fail(ErrorKind::domain, "phi integral needs 0 <= a <= b");
  }
  if (b > phi.domain_end() * (1.0 + 1e-12)) {
    fail(ErrorKind::domain, "phi evaluated beyond its domain end " + std::to_string(phi.domain_end()));
  }
}

}  // namespace

PhiFunction PhiFunction::fractional(double hurst, double rate, double mark_mean) {
  if (!(hurst > 0.5 && hurst < 1.0)) {
    fail(ErrorKind::domain, "phi_fractional needs H in (1/2, 1), got " + std::to_string(hurst));
  }
  if (!(rate > 0.0) || !(mark_mean > 0.0)) {
    fail(ErrorKind::domain, "phi_fractional needs a positive rate and mark mean");
  }
  const double coef =
      std::exp(ln_gamma(1.5 - hurst) - ln_gamma(2.0 - 2.0 * hurst)) / (rate * mark_mean);
  return PhiFunction(Fractional{hurst, rate, mark_mean, coef});
}

PhiFunction PhiFunction::affine(double intercept, double slope) {
  if (!std::isfinite(intercept) || !std::isfinite(slope)) {
    fail(ErrorKind::domain, "affine phi needs finite coefficients");
  }
  return PhiFunction(Affine{intercept, slope});
}

PhiFunction PhiFunction::grid(std::vector<double> nodes, std::vector<double> values,
                              double origin_exponent, double domain_end) {
  if (nodes.empty() || nodes.size() != values.size()) {
    fail(ErrorKind::domain, "grid phi needs equal, non-empty node and value arrays");
  }
  if (!(nodes.front() > 0.0)) fail(ErrorKind::domain, "grid phi nodes must be positive");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) fail(ErrorKind::domain, "grid phi nodes must increase");
  }
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::domain, "grid phi values must be finite");
  }
  if (!(origin_exponent >= 0.0 && origin_exponent < 1.0)) {
    fail(ErrorKind::domain, "grid phi origin exponent must lie in [0, 1)");
  }
  if (!(domain_end >= nodes.back())) domain_end = nodes.back();
  return PhiFunction(Grid{std::move(nodes), std::move(values), origin_exponent, domain_end, {}, 1.0});
}

PhiFunction PhiFunction::grid_divided(std::vector<double> nodes, std::vector<double> values,
                                      std::function<double(double)> divisor, double divisor_floor,
                                      double origin_exponent, double domain_end) {
  if (!divisor || !(divisor_floor > 0.0)) {
    fail(ErrorKind::domain, "grid phi divisor must be positive with a positive floor");
  }
  auto phi = grid(std::move(nodes), std::move(values), origin_exponent, domain_end);
  auto& g = std::get<Grid>(phi.repr_);
  g.divisor = std::make_shared<const std::function<double(double)>>(std::move(divisor));
  g.divisor_floor = divisor_floor;
  return phi;
}

double PhiFunction::operator()(double s) const {
  return std::visit(
      overloaded{
          [s](const Fractional& f) {
            if (!(s > 0.0)) fail(ErrorKind::domain, "fractional phi needs s > 0");
            return f.coefficient * std::pow(s, 0.5 - f.hurst);
          },
          [s](const Affine& a) { return a.intercept + a.slope * s; },
          [this, s](const Grid& g) {
            if (!(s > 0.0) && g.origin_exponent > 0.0) {
              fail(ErrorKind::domain, "grid phi with a singular origin needs s > 0");
            }
            if (s > g.domain_end * (1.0 + 1e-12)) {
              fail(ErrorKind::domain, "phi evaluated beyond its domain end " +
                                          std::to_string(domain_end()));
            }
            return scaled_at(g, s) * std::pow(s, -g.origin_exponent) / divisor_at(g, s);
          },
      },
      repr_);
}

double PhiFunction::integral(double a, double b) const {
  check_interval(*this, a, b);
  return std::visit(
      overloaded{
          [a, b](const Fractional& f) {
            const double e = 1.5 - f.hurst;
            return f.coefficient * (std::pow(b, e) - std::pow(a, e)) / e;
          },
          [a, b](const Affine& af) {
            return af.intercept * (b - a) + 0.5 * af.slope * (b * b - a * a);
          },
          [a, b](const Grid& g) { return grid_integral(g, a, b); },
      },
      repr_);
}

double PhiFunction::upper_bound(double a, double b) const {
  if (!(b >= a) || a < 0.0) fail(ErrorKind::domain, "upper_bound needs 0 <= a <= b");
  return std::visit(
      overloaded{
          [a](const Fractional& f) {
            if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
            return f.coefficient * std::pow(a, 0.5 - f.hurst);
          },
          [a, b](const Affine& af) {
            return std::max(af.intercept + af.slope * a, af.intercept + af.slope * b);
          },
          [a, b](const Grid& g) {
            if (g.origin_exponent > 0.0 && !(a > 0.0)) {
              return std::numeric_limits<double>::infinity();
            }
            double gmax = std::max(scaled_at(g, a), scaled_at(g, b));
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
              if (g.nodes[i] > a && g.nodes[i] < b) gmax = std::max(gmax, scaled_value(g, i));
            }
            const double bound = gmax * (gmax >= 0.0 ? std::pow(a, -g.origin_exponent)
                                                     : std::pow(b, -g.origin_exponent));
            return g.divisor ? std::max(bound, 0.0) / g.divisor_floor : bound;
          },
      },
      repr_);
}

double PhiFunction::origin_exponent() const {
  return std::visit(overloaded{
                        [](const Fractional& f) { return f.hurst - 0.5; },
                        [](const Affine&) { return 0.0; },
                        [](const Grid& g) { return g.origin_exponent; },
                    },
                    repr_);
}

double PhiFunction::origin_envelope(double a) const {
  return std::visit(
      overloaded{
          [](const Fractional& f) { return f.coefficient; },
          [a](const Affine& af) {
            return std::max(af.intercept, af.intercept + af.slope * a);
          },
          [a](const Grid& g) {
            double gmax = scaled_at(g, a);
            for (std::size_t i = 0; i < g.nodes.size() && g.nodes[i] < a; ++i) {
              gmax = std::max(gmax, scaled_value(g, i));
            }
            gmax = std::max(gmax, scaled_at(g, 0.0));
            return g.divisor ? std::max(gmax, 0.0) / g.divisor_floor : gmax;
          },
      },
      repr_);
}

double PhiFunction::domain_end() const {
  if (const auto* g = std::get_if<Grid>(&repr_)) return g->domain_end;
  return std::numeric_limits<double>::infinity();
}

bool PhiFunction::nonnegative() const {
  return std::visit(overloaded{
                        [](const Fractional&) { return true; },
                        [](const Affine& af) { return af.intercept >= 0.0 && af.slope >= 0.0; },
                        [](const Grid& g) {
                          return scaled_at(g, 0.0) >= 0.0 &&
                                 std::all_of(g.values.begin(), g.values.end(),
                                             [](double v) { return v >= 0.0; });
                        },
                    },
                    repr_);
}

double integral_of_product(const PhiFunction& a, const PhiFunction& b, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::domain, "integral_of_product needs t >= 0");
  if (t == 0.0) return 0.0;
  auto f = [&](double s) { return a(s) * b(s); };
  return quad::origin_singular(f, t, a.origin_exponent() + b.origin_exponent(), 1e-10, 1e-300)
      .value;
}

}  // namespace fpp
