#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <variant>
#include <vector>

namespace fpp {

/// The calibration function phi solving m1 * int_0^t K(t,s) phi(s) lambda(s) ds = t.
///
/// Three representations:
///  - fractional: c * s^{1/2-H}, the closed form for the fractional kernel
///    under a constant rate;
///  - affine: c0 + c1 s (constant phi is the c1 = 0 case);
///  - grid: values at increasing nodes, interpolated so that phi(s) * s^gamma
///    is piecewise linear (gamma = origin exponent, 0 gives plain linear
///    interpolation). Below the first node phi(s) * s^gamma continues the
///    first segment linearly; past the last node it is held constant.
///    With a divisor d, phi(s) d(s) s^gamma is the piecewise-linear part.
class PhiFunction {
 public:
  struct Fractional {
    double hurst = 0.75;
    double rate = 1.0;
    double mark_mean = 1.0;
    double coefficient = 0.0;
  };
  struct Affine {
    double intercept = 0.0;
    double slope = 0.0;
  };
  struct Grid {
    std::vector<double> nodes;
    std::vector<double> values;
    double origin_exponent = 0.0;
    double domain_end = std::numeric_limits<double>::infinity();
    std::shared_ptr<const std::function<double(double)>> divisor;
    double divisor_floor = 1.0;  // positive lower bound of the divisor
  };
  using Repr = std::variant<Fractional, Affine, Grid>;

  static PhiFunction fractional(double hurst, double rate, double mark_mean = 1.0);
  static PhiFunction affine(double intercept, double slope);
  static PhiFunction constant(double value) { return affine(value, 0.0); }
  static PhiFunction grid(std::vector<double> nodes, std::vector<double> values,
                          double origin_exponent = 0.0,
                          double domain_end = std::numeric_limits<double>::infinity());
  /// Grid phi interpolated through phi * divisor, for a positive divisor
  /// bounded below by divisor_floor.
  static PhiFunction grid_divided(std::vector<double> nodes, std::vector<double> values,
                                  std::function<double(double)> divisor, double divisor_floor,
                                  double origin_exponent, double domain_end);

  double operator()(double s) const;

  /// int_a^b phi(s) ds, 0 <= a <= b <= domain_end().
  double integral(double a, double b) const;

  /// Upper bound for phi on [a, b], a > 0 (a = 0 allowed when the origin
  /// exponent is 0).
  double upper_bound(double a, double b) const;

  /// gamma >= 0 such that phi(s) s^gamma stays bounded as s -> 0.
  double origin_exponent() const;

  /// C such that phi(s) <= C s^{-gamma} on (0, a].
  double origin_envelope(double a) const;

  double domain_end() const;
  bool nonnegative() const;

  const Repr& repr() const { return repr_; }

 private:
  explicit PhiFunction(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

/// int_0^t a(s) b(s) ds by quadrature with the origin singularity removed.
double integral_of_product(const PhiFunction& a, const PhiFunction& b, double t);

}  // namespace fpp
