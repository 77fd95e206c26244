#include "fpp/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "fpp/csv.hpp"
#include "fpp/error.hpp"

namespace fpp {

IntensitySpec IntensitySpec::constant(double base_rate) {
  if (!(base_rate > 0.0) || !std::isfinite(base_rate)) {
    fail(ErrorKind::domain, "base_rate must be positive and finite");
  }
  return IntensitySpec(Kind::constant, base_rate, 0.0, std::nullopt);
}

IntensitySpec IntensitySpec::scaled_by_phi(double base_rate, double theta, PhiFunction phi) {
  if (!(base_rate > 0.0) || !std::isfinite(base_rate)) {
    fail(ErrorKind::domain, "base_rate must be positive and finite");
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    fail(ErrorKind::domain, "theta must be finite and >= 0");
  }
  if (!phi.nonnegative()) fail(ErrorKind::domain, "scaled intensity needs phi >= 0");
  return IntensitySpec(Kind::scaled_by_phi, base_rate, theta, std::move(phi));
}

double IntensitySpec::operator()(double s) const {
  if (kind_ == Kind::constant || theta_ == 0.0) return base_rate_;
  return base_rate_ * (1.0 + theta_ * (*phi_)(s));
}

double IntensitySpec::origin_exponent() const {
  if (kind_ == Kind::constant || theta_ == 0.0) return 0.0;
  return phi_->origin_exponent();
}

MarkDistributionSpec MarkDistributionSpec::exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    fail(ErrorKind::domain, "exponential marks need a positive finite mean");
  }
  return {Kind::exponential, mean, 0.0, 0.0};
}

MarkDistributionSpec MarkDistributionSpec::lognormal(double mu, double sigma) {
  if (!std::isfinite(mu) || !(sigma >= 0.0) || !std::isfinite(sigma)) {
    fail(ErrorKind::domain, "lognormal marks need finite mu and sigma >= 0");
  }
  return {Kind::lognormal, std::exp(mu + 0.5 * sigma * sigma), mu, sigma};
}

void MarkedPath::validate() const {
  if (!(horizon > 0.0)) fail(ErrorKind::domain, "path horizon must be positive");
  if (jump_times.size() != marks.size()) {
    fail(ErrorKind::domain, "jump_times and marks differ in length");
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < jump_times.size(); ++i) {
    if (!(jump_times[i] > prev)) fail(ErrorKind::domain, "jump times must be positive and increasing");
    if (!(marks[i] > 0.0)) fail(ErrorKind::domain, "marks must be positive");
    prev = jump_times[i];
  }
  if (prev > horizon) fail(ErrorKind::domain, "jump time beyond horizon");
}

namespace {

using Rng = std::mt19937_64;

// 53 random bits in [0, 1).
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

class MarkSampler {
 public:
  explicit MarkSampler(const MarkDistributionSpec& spec) : spec_(spec), normal_(0.0, 1.0) {}

  double operator()(Rng& rng) {
    switch (spec_.kind) {
      case MarkDistributionSpec::Kind::unit: return 1.0;
      case MarkDistributionSpec::Kind::exponential: return spec_.mean * -std::log1p(-uniform01(rng));
      case MarkDistributionSpec::Kind::lognormal: return std::exp(spec_.mu + spec_.sigma * normal_(rng));
    }
    return 1.0;
  }

 private:
  MarkDistributionSpec spec_;
  std::normal_distribution<double> normal_;
};

// Homogeneous-candidate thinning on (a, b] against a constant bound.
void thin_segment(const IntensitySpec& intensity, double a, double b, double bound, Rng& rng,
                  MarkSampler& mark, MarkedPath& out) {
  if (!std::isfinite(bound) || !(bound > 0.0)) {
    fail(ErrorKind::domain, "cannot bound the intensity on [" + std::to_string(a) + ", " +
                                std::to_string(b) + "]");
  }
  double t = a;
  for (;;) {
    t += exponential(rng, bound);
    if (t > b) break;
    const double u = uniform01(rng);
    if (u * bound <= intensity(t)) {
      out.jump_times.push_back(t);
      out.marks.push_back(mark(rng));
    }
  }
}

// Thinning on (0, b] against base * (1 + theta * C * s^{-gamma}).
void thin_origin_segment(const IntensitySpec& intensity, double b, double gamma, double envelope,
                         Rng& rng, MarkSampler& mark, MarkedPath& out) {
  const double base = intensity.base_rate();
  const double theta = intensity.theta();
  const double scale = base * theta * envelope;
  const double q = 1.0 - gamma;

  std::vector<double> candidates;
  for (double t = exponential(rng, base); t <= b; t += exponential(rng, base)) {
    candidates.push_back(t);
  }
  // Power-law component: integrated rate scale * s^q / q, inverted in closed form.
  const double total = scale * std::pow(b, q) / q;
  for (double e = exponential(rng, 1.0); e <= total; e += exponential(rng, 1.0)) {
    candidates.push_back(std::min(b, std::pow(q * e / scale, 1.0 / q)));
  }
  std::sort(candidates.begin(), candidates.end());

  for (double t : candidates) {
    const double dominating = base * (1.0 + theta * envelope * std::pow(t, -gamma));
    const double u = uniform01(rng);
    if (u * dominating <= intensity(t)) {
      out.jump_times.push_back(t);
      out.marks.push_back(mark(rng));
    }
  }
}

constexpr int kThinningSegments = 64;

}  // namespace

MarkedPath simulate(const IntensitySpec& intensity, const MarkDistributionSpec& marks,
                    double horizon, std::uint64_t seed) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    fail(ErrorKind::domain, "horizon must be positive and finite");
  }
  Rng rng(seed);
  MarkSampler mark(marks);
  MarkedPath path;
  path.horizon = horizon;

  if (intensity.kind() == IntensitySpec::Kind::constant || intensity.theta() == 0.0) {
    thin_segment(intensity, 0.0, horizon, intensity.base_rate(), rng, mark, path);
    return path;
  }

  const PhiFunction& phi = *intensity.phi();
  const double gamma = phi.origin_exponent();
  if (!(gamma < 1.0)) {
    fail(ErrorKind::domain, "intensity is not integrable at the origin");
  }
  const double base = intensity.base_rate();
  const double theta = intensity.theta();
  const double width = horizon / kThinningSegments;

  if (gamma > 0.0) {
    thin_origin_segment(intensity, width, gamma, phi.origin_envelope(width), rng, mark, path);
  } else {
    thin_segment(intensity, 0.0, width, base * (1.0 + theta * phi.upper_bound(0.0, width)), rng,
                 mark, path);
  }
  for (int k = 1; k < kThinningSegments; ++k) {
    const double a = k * width;
    const double b = (k + 1 == kThinningSegments) ? horizon : (k + 1) * width;
    thin_segment(intensity, a, b, base * (1.0 + theta * phi.upper_bound(a, b)), rng, mark, path);
  }
  return path;
}

double integrated_intensity(const IntensitySpec& intensity, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::domain, "integrated_intensity needs t >= 0");
  if (intensity.kind() == IntensitySpec::Kind::constant || intensity.theta() == 0.0) {
    return intensity.base_rate() * t;
  }
  return intensity.base_rate() * (t + intensity.theta() * intensity.phi()->integral(0.0, t));
}

void write_csv(std::ostream& out, const MarkedPath& path) {
  out << "t,z\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    csv::write_row(out, {path.jump_times[i], path.marks[i]});
  }
}

MarkedPath read_marked_path_csv(std::istream& in, double horizon) {
  MarkedPath path;
  path.horizon = horizon;
  for (const auto& row : csv::read_table(in, "t,z")) {
    path.jump_times.push_back(row[0]);
    path.marks.push_back(row[1]);
  }
  path.validate();
  return path;
}

}  // namespace fpp
