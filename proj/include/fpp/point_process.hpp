#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fpp/phi_function.hpp"

namespace fpp {

/// Jump rate lambda(s): either constant, or base_rate * (1 + theta * phi(s)).
class IntensitySpec {
 public:
  enum class Kind { constant, scaled_by_phi };

  static IntensitySpec constant(double base_rate);
  static IntensitySpec scaled_by_phi(double base_rate, double theta, PhiFunction phi);

  double operator()(double s) const;

  Kind kind() const { return kind_; }
  double base_rate() const { return base_rate_; }
  double theta() const { return theta_; }
  const std::optional<PhiFunction>& phi() const { return phi_; }

  /// gamma such that lambda(s) s^gamma is bounded near the origin.
  double origin_exponent() const;

 private:
  IntensitySpec(Kind kind, double base_rate, double theta, std::optional<PhiFunction> phi)
      : kind_(kind), base_rate_(base_rate), theta_(theta), phi_(std::move(phi)) {}

  Kind kind_;
  double base_rate_;
  double theta_;
  std::optional<PhiFunction> phi_;
};

/// Law of the marks: a probability measure on (0, inf) with mean m1.
struct MarkDistributionSpec {
  enum class Kind { unit, exponential, lognormal };

  Kind kind = Kind::unit;
  double mean = 1.0;
  double mu = 0.0;
  double sigma = 0.0;

  static MarkDistributionSpec unit() { return {}; }
  static MarkDistributionSpec exponential(double mean);
  static MarkDistributionSpec lognormal(double mu, double sigma);
};

/// One realization: jump times 0 < T_1 < ... <= horizon with positive marks.
struct MarkedPath {
  std::vector<double> jump_times;
  std::vector<double> marks;
  double horizon = 0.0;

  std::size_t size() const { return jump_times.size(); }

  /// Throws ErrorKind::domain when an invariant does not hold.
  void validate() const;
};

/// Draws a path on [0, horizon] by thinning. The window is cut into
/// segments, each dominated by a constant rate; when phi is singular at the
/// origin the first segment is dominated by base*(1 + theta*C*s^{-gamma}),
/// whose points are drawn by inverting its integrated rate.
MarkedPath simulate(const IntensitySpec& intensity, const MarkDistributionSpec& marks,
                    double horizon, std::uint64_t seed);

/// int_0^t lambda(s) ds.
double integrated_intensity(const IntensitySpec& intensity, double t);

/// CSV with header "t,z".
void write_csv(std::ostream& out, const MarkedPath& path);
MarkedPath read_marked_path_csv(std::istream& in, double horizon);

}  // namespace fpp
