#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpp/phi_function.hpp"
#include "fpp/point_process.hpp"

namespace fpp {

/// f(theta) = sum_{T_j <= t} ln(1 + theta phi(T_j)) - theta int_0^t phi lambda ds
/// and its first two derivatives.
struct ScoreValue {
  double f = 0.0;
  double f_prime = 0.0;
  double f_second = 0.0;
};

/// int_0^t phi(s) lambda(s) ds; closed form when lambda is constant.
double phi_lambda_integral(const PhiFunction& phi, const IntensitySpec& intensity, double t);

ScoreValue score(const MarkedPath& path, const PhiFunction& phi, const IntensitySpec& intensity,
                 double theta, double t);

/// Maximizer of f over theta >= 0: 0 when f'(0) <= 0, otherwise the root of
/// f' from safeguarded Newton on a doubling bracket. Throws
/// ErrorKind::bracket_failure when f' stays positive up to 1e12.
double mle_solve(const MarkedPath& path, const PhiFunction& phi, const IntensitySpec& intensity,
                 double t);

struct EstimateTrace {
  std::vector<double> times;
  std::vector<double> theta_hat;
  /// Indices k with a jump in (times[k-1], times[k]] (in (0, times[0]] for k = 0).
  std::vector<std::size_t> jump_epochs;
};

EstimateTrace trajectory(const MarkedPath& path, const PhiFunction& phi,
                         const IntensitySpec& intensity, const std::vector<double>& grid);

/// Number of k that are not jump epochs with theta_hat[k] > theta_hat[k-1] + tol.
std::size_t monotonicity_violations(const EstimateTrace& trace, double tol = 0.0);

/// CSV with header "t,theta_hat,jump" (jump is 1 at jump epochs).
void write_csv(std::ostream& out, const EstimateTrace& trace);

struct ConsistencyConfig {
  PhiFunction phi = PhiFunction::constant(1.0);
  double base_rate = 1.0;
  double theta = 1.0;
  MarkDistributionSpec marks;
  std::vector<double> horizons;
  std::size_t replicas = 100;
  std::uint64_t seed = 0;
  double rmse_threshold = 0.18;
  unsigned workers = 1;
};

/// The integrability conditions of the consistency theorem for the given phi
/// under a constant rate, settled analytically where phi has a closed form.
struct HypothesisCheck {
  std::string phi_kind;
  /// int_0^t phi^2 lambda ds grows like t^{growth_exponent}; diverges iff > 0.
  double growth_exponent = 0.0;
  bool phi2_integral_diverges = false;
  /// int_0^t phi^{2+j} lambda ds is finite only for j < finite_moment_bound.
  double finite_moment_bound = 0.0;
  /// Ratio int phi^{2+j} lambda / int phi^2 lambda ~ t^{-ratio_decay_rate * j}
  /// for admissible j.
  double ratio_decay_rate = 0.0;
  bool ratio_condition_holds = false;
  std::string note;
};

HypothesisCheck check_hypotheses(const PhiFunction& phi);

struct HorizonSummary {
  double horizon = 0.0;
  double mean_estimate = 0.0;
  double mean_abs_error = 0.0;
  double rmse = 0.0;
};

struct ConsistencyReport {
  std::vector<HorizonSummary> horizons;
  /// Share of replicas with |theta_hat - theta| smaller at the last horizon
  /// than at the first.
  double fraction_error_decreasing = 0.0;
  bool rmse_decreasing = false;
  double rmse_threshold = 0.0;
  bool final_rmse_below_threshold = false;
  bool passed = false;
  HypothesisCheck hypotheses;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  double theta = 0.0;
  /// estimates[r][k]: theta_hat of replica r at horizon k.
  std::vector<std::vector<double>> estimates;
};

/// Simulates jump times with rate base_rate * (1 + theta phi(s)) and records
/// theta_hat at each horizon. Throws ErrorKind::degenerate_sample when a
/// replica has no jump by the largest horizon.
ConsistencyReport consistency_experiment(const ConsistencyConfig& config);

nlohmann::ordered_json to_json(const HypothesisCheck& check);
nlohmann::ordered_json to_json(const ConsistencyReport& report);

}  // namespace fpp
