#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpp/kernels.hpp"
#include "fpp/phi_function.hpp"
#include "fpp/point_process.hpp"

namespace fpp {

/// Mark-independent shift h(s) = scale * phi(s), or the constant h = scale.
class ShiftFunction {
 public:
  static ShiftFunction constant(double value);
  static ShiftFunction scaled_phi(double scale, PhiFunction phi);

  double operator()(double s) const;
  double scale() const { return scale_; }
  const std::optional<PhiFunction>& phi() const { return phi_; }
  bool is_zero() const { return scale_ == 0.0; }
  double origin_exponent() const { return phi_ ? phi_->origin_exponent() : 0.0; }

  /// Throws ErrorKind::domain unless h > -1 on (0, horizon].
  void validate(double horizon) const;
  /// int_0^t h(s) lambda(s) ds.
  double integrated(const IntensitySpec& intensity, double t) const;
  /// int_0^t |h(s)| lambda(s) ds, the integrability witness.
  double abs_integrated(const IntensitySpec& intensity, double t) const;

 private:
  ShiftFunction(double scale, std::optional<PhiFunction> phi)
      : scale_(scale), phi_(std::move(phi)) {}
  double scale_;
  std::optional<PhiFunction> phi_;
};

/// Y_t = sum_{T_j <= t} ln(1 + h(T_j)) - int_0^t h(s) lambda(s) ds.
double log_density(const MarkedPath& path, const ShiftFunction& h, const IntensitySpec& intensity,
                   double t);
/// exp(Y_t), the density of P_h with respect to P on F_t.
double density(const MarkedPath& path, const ShiftFunction& h, const IntensitySpec& intensity,
               double t);
/// Compensated process minus m1 * int_0^t K(t,s) h(s) lambda(s) ds.
double shifted_compensated(const MarkedPath& path, const KernelSpec& kernel, const ShiftFunction& h,
                           const IntensitySpec& intensity, double m1, double t);

struct LawComparisonConfig {
  KernelSpec kernel = KernelSpec::indicator();
  IntensitySpec intensity = IntensitySpec::constant(1.0);
  MarkDistributionSpec marks;
  ShiftFunction h = ShiftFunction::constant(0.0);
  double horizon = 1.0;
  std::vector<double> eval_times;
  std::size_t replicas = 1000;
  std::uint64_t seed = 0;
  std::size_t bootstrap = 1000;
  unsigned workers = 1;
};

struct MomentComparison {
  double weighted = 0.0;
  double weighted_se = 0.0;
  double unweighted = 0.0;
  double unweighted_se = 0.0;
  double discrepancy = 0.0;  // weighted - unweighted
  double combined_se = 0.0;  // of the discrepancy, from the paired replicas
  bool pass = false;         // |discrepancy| <= 4 combined_se
};

struct TimeComparison {
  double time = 0.0;
  double shift = 0.0;  // m1 int_0^t K(t,s) h(s) lambda(s) ds
  MomentComparison first;
  MomentComparison second;
  double ks_statistic = 0.0;
  double ks_threshold = 0.0;  // bootstrap 99% quantile
  bool ks_pass = false;
};

struct LawComparisonReport {
  std::vector<TimeComparison> times;
  double weight_mean = 0.0;
  double weight_se = 0.0;
  bool weight_pass = false;
  double effective_sample_size = 0.0;
  std::size_t replicas = 0;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 0;
  bool passed = false;
};

/// Monte-Carlo check of L(compensated process, P_h) = L(shifted process, P).
///
/// Sample A is the compensated process at the evaluation times on paths
/// drawn under P, weighted by density(path, h, ., horizon); sample B is the
/// shifted process on the same paths with unit weights. The kernel must be
/// degenerate on the diagonal (ErrorKind::precondition otherwise);
/// ErrorKind::degenerate_weights is thrown when the effective sample size
/// (sum w)^2 / sum w^2 falls below 100.
LawComparisonReport verify_equality_in_law(const LawComparisonConfig& config);

nlohmann::ordered_json to_json(const LawComparisonReport& report);

}  // namespace fpp
