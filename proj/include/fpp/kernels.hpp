#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "fpp/point_process.hpp"

namespace fpp {

struct IndicatorKernel {};

/// K(t,s) = exp(-a (t - s)) for s <= t.
struct ExpShotNoiseKernel {
  double rate = 1.0;
};

/// Fractional Brownian kernel K_H, 1/2 < H < 1, with the constants of its
/// hypergeometric representation precomputed.
struct FractionalKernel {
  double hurst = 0.75;
  double alpha = 0.25;          // H - 1/2
  double inv_gamma = 1.0;       // 1 / Gamma(H + 1/2)
  double conn_regular = 0.5;    // connection coefficient of the regular branch
  double conn_singular = 0.5;   // connection coefficient of the (s/t)^{1-2H} branch

  explicit FractionalKernel(double hurst);
  double operator()(double t, double s) const;
};

/// Bilinear interpolation of K on a rectangular (t, s) grid; zero for s > t.
struct TabulatedKernel {
  std::vector<double> t_grid;
  std::vector<double> s_grid;
  std::vector<double> values;  // row-major, values[i * s_grid.size() + j] = K(t_i, s_j)
};

enum class PathRegularity { continuous_paths, cadlag_paths, irregular };

/// A triangular kernel K(t, s).
class KernelSpec {
 public:
  using Repr = std::variant<IndicatorKernel, ExpShotNoiseKernel, FractionalKernel, TabulatedKernel>;

  static KernelSpec indicator() { return KernelSpec(IndicatorKernel{}); }
  static KernelSpec exp_shot_noise(double rate);
  static KernelSpec fractional(double hurst);
  static KernelSpec tabulated(TabulatedKernel table);

  /// K(t, s); exactly 0 for s > t.
  double operator()(double t, double s) const;

  /// True iff K(t,t) = 0 for all t.
  bool diagonal_degenerate() const;

  /// gamma with K(t,s) = O(s^{-gamma}) as s -> 0.
  double origin_exponent() const;

  /// alpha with K(t,s) ~ (t-s)^alpha as s -> t (0 for kernels with K(t,t) != 0).
  double diagonal_exponent() const;

  std::string name() const;
  const Repr& repr() const { return repr_; }

 private:
  explicit KernelSpec(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

double kernel_eval(const KernelSpec& kernel, double t, double s);

PathRegularity diagonal_class(const KernelSpec& kernel);
std::string to_string(PathRegularity regularity);

/// int_0^t K(t,s) w(s) ds, where w(s) = O(s^{-weight_exponent}) near 0.
/// Both endpoint behaviours are removed by substitution before adaptive
/// quadrature.
double kernel_weighted_integral(const KernelSpec& kernel, double t,
                                const std::function<double(double)>& weight,
                                double weight_exponent, double rel_tol = 1e-10);

/// int_0^t K(t,s) lambda(s) ds.
double kernel_lambda_integral(const KernelSpec& kernel, const IntensitySpec& intensity, double t);

/// CSV rows "t,s,value"; rows with s > t may be omitted.
KernelSpec read_tabulated_kernel_csv(std::istream& in);

}  // namespace fpp
