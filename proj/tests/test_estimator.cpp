#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "fpp/error.hpp"
#include "fpp/estimator.hpp"
#include "fpp/parallel.hpp"
#include "fpp/phi_solver.hpp"

using namespace fpp;

namespace {

MarkedPath make_path(std::vector<double> t, double horizon) {
  MarkedPath p;
  p.marks.assign(t.size(), 1.0);
  p.jump_times = std::move(t);
  p.horizon = horizon;
  return p;
}

std::size_t count_until(const MarkedPath& p, double t) {
  std::size_t n = 0;
  for (double s : p.jump_times) n += s <= t;
  return n;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("score without jumps") {
  const auto p = make_path({}, 10.0);
  const auto phi = PhiFunction::constant(2.0);
  const auto s = score(p, phi, IntensitySpec::constant(1.5), 0.7, 4.0);
  CHECK(s.f == doctest::Approx(-0.7 * 12.0));
  CHECK(s.f_prime == doctest::Approx(-12.0));
  CHECK(s.f_second == 0.0);
  CHECK(mle_solve(p, phi, IntensitySpec::constant(1.5), 4.0) == 0.0);
}

TEST_CASE("score with twelve jumps and constant phi") {
  std::vector<double> t;
  for (int i = 1; i <= 12; ++i) t.push_back(0.8 * i);
  const auto p = make_path(t, 10.0);
  for (double theta : {0.0, 0.2, 1.0, 3.0}) {
    const auto s = score(p, PhiFunction::constant(1.0), IntensitySpec::constant(1.0), theta, 10.0);
    CHECK(s.f_prime == doctest::Approx(12.0 / (1.0 + theta) - 10.0).epsilon(1e-14));
  }
  CHECK(std::abs(mle_solve(p, PhiFunction::constant(1.0), IntensitySpec::constant(1.0), 10.0) -
                 0.2) < 1e-12);
}

TEST_CASE("single jump with phi = 2 and unit integral") {
  // phi = 2 and lambda = 1/(2t) make int_0^t phi lambda = 1.
  const auto p = make_path({0.5}, 1.0);
  CHECK(std::abs(mle_solve(p, PhiFunction::constant(2.0), IntensitySpec::constant(0.5), 1.0) -
                 0.5) < 1e-12);
}

TEST_CASE("phi-lambda integral") {
  const auto phi = phi_fractional(0.7, 1.0);
  const double closed = phi_lambda_integral(phi, IntensitySpec::constant(1.0), 3.0);
  CHECK(closed == doctest::Approx(phi.integral(0.0, 3.0)).epsilon(1e-15));
  const auto scaled = IntensitySpec::scaled_by_phi(2.0, 0.5, PhiFunction::affine(1.0, 1.0));
  // int_0^2 (1+s) 2 (1 + 0.5 (1+s)) ds
  CHECK(phi_lambda_integral(PhiFunction::affine(1.0, 1.0), scaled, 2.0) ==
        doctest::Approx(2.0 * (4.0 + 0.5 * 26.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("closed-form estimator on simulated paths") {
  for (std::size_t r = 0; r < 1000; ++r) {
    const auto p = simulate(IntensitySpec::scaled_by_phi(1.0, 0.4, PhiFunction::constant(1.0)), {},
                            10.0, derive_seed(1, 0, r));
    for (double t : {1.0, 5.0, 10.0}) {
      const double expected = std::max(static_cast<double>(count_until(p, t)) / t - 1.0, 0.0);
      CHECK(std::abs(mle_solve(p, PhiFunction::constant(1.0), IntensitySpec::constant(1.0), t) -
                     expected) <= 1e-8);
    }
  }
}

TEST_CASE("score properties on simulated fractional paths") {
  const auto phi = phi_fractional(0.7, 1.0);
  const auto lambda = IntensitySpec::constant(1.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> theta_u(0.0, 3.0);
  std::uniform_real_distribution<double> t_u(0.5, 20.0);
  int interior = 0;
  for (std::size_t r = 0; r < 1000; ++r) {
    const auto p = simulate(IntensitySpec::scaled_by_phi(1.0, 1.0, phi), {}, 20.0,
                            derive_seed(2, 0, r));
    const double t = t_u(rng);
    const double theta = theta_u(rng) + 1e-3;
    const auto s = score(p, phi, lambda, theta, t);
    CHECK(s.f_second <= 0.0);

    // Central differences at eps = 1e-5.
    const double eps = 1e-5;
    const auto up = score(p, phi, lambda, theta + eps, t);
    const auto dn = score(p, phi, lambda, theta - eps, t);
    const double fd1 = (up.f - dn.f) / (2.0 * eps);
    const double fd2 = (up.f_prime - dn.f_prime) / (2.0 * eps);
    // Relative to |f'|, floored where f' crosses zero.
    const double scale1 = std::max(std::abs(s.f_prime), 1e-4 * (1.0 + std::abs(s.f)));
    CHECK(std::abs(fd1 - s.f_prime) <= 1e-6 * scale1);
    if (s.f_second != 0.0) CHECK(std::abs(fd2 - s.f_second) <= 1e-6 * std::abs(s.f_second));

    const double est = mle_solve(p, phi, lambda, t);
    CHECK(est >= 0.0);
    const auto at = score(p, phi, lambda, est, t);
    if (est > 0.0) {
      ++interior;
      CHECK(std::abs(at.f_prime) <= 1e-8);
    } else {
      CHECK(score(p, phi, lambda, 0.0, t).f_prime <= 0.0);
    }
  }
  CHECK(interior > 500);
}

TEST_CASE("trajectory is nonincreasing between jumps") {
  const auto phi = phi_fractional(0.7, 1.0);
  const auto lambda = IntensitySpec::constant(1.0);
  const auto p = simulate(IntensitySpec::scaled_by_phi(1.0, 1.0, phi), {}, 30.0, 77);
  const auto trace = trajectory(p, phi, lambda, linspace(0.01, 30.0, 3000));
  CHECK(monotonicity_violations(trace) == 0);
  CHECK(trace.jump_epochs.size() <= p.size());
  CHECK_FALSE(trace.jump_epochs.empty());
  for (double v : trace.theta_hat) CHECK((std::isfinite(v) && v >= 0.0));
}

TEST_CASE("trajectory inside one inter-jump interval") {
  const auto p = make_path({1.0, 5.0}, 6.0);
  const auto trace = trajectory(p, phi_fractional(0.6, 1.0), IntensitySpec::constant(1.0),
                                linspace(1.5, 4.5, 50));
  // The jump at 1 falls in (0, times[0]].
  CHECK(trace.jump_epochs == std::vector<std::size_t>{0});
  for (std::size_t k = 1; k < trace.times.size(); ++k) {
    CHECK(trace.theta_hat[k] <= trace.theta_hat[k - 1]);
  }
}

TEST_CASE("indicator trajectory moves up only at jumps") {
  const auto p = simulate(IntensitySpec::constant(2.0), {}, 20.0, 9);
  const auto grid = linspace(0.05, 20.0, 400);
  const auto trace = trajectory(p, PhiFunction::constant(1.0), IntensitySpec::constant(1.0), grid);
  std::size_t e = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double expected =
        std::max(static_cast<double>(count_until(p, grid[k])) / grid[k] - 1.0, 0.0);
    CHECK(std::abs(trace.theta_hat[k] - expected) < 1e-10);
    const bool jump = e < trace.jump_epochs.size() && trace.jump_epochs[e] == k;
    if (jump) ++e;
    if (k > 0 && trace.theta_hat[k] > trace.theta_hat[k - 1]) CHECK(jump);
  }
}

TEST_CASE("empty path trajectory is zero") {
  const auto trace = trajectory(make_path({}, 5.0), phi_fractional(0.7, 1.0),
                                IntensitySpec::constant(1.0), linspace(0.1, 5.0, 20));
  for (double v : trace.theta_hat) CHECK(v == 0.0);
  std::ostringstream out;
  write_csv(out, trace);
  CHECK(out.str().rfind("t,theta_hat,jump\n", 0) == 0);
}

TEST_CASE("trajectory grid must lie inside the path window") {
  const auto p = make_path({1.0}, 2.0);
  const std::vector<double> beyond{1.0, 3.0};
  CHECK_THROWS_AS(trajectory(p, PhiFunction::constant(1.0), IntensitySpec::constant(1.0), beyond),
                  Error);
}

TEST_CASE("bracket failure when the integral vanishes") {
  // phi = 2 - 4s integrates to zero on [0, 1] while phi(0.25) = 1 > 0.
  try {
    mle_solve(make_path({0.25}, 1.0), PhiFunction::affine(2.0, -4.0), IntensitySpec::constant(1.0),
              1.0);
    FAIL("expected a bracket failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::bracket_failure);
  }
}

TEST_CASE("hypothesis report for the fractional phi") {
  const auto h = check_hypotheses(phi_fractional(0.7, 1.0));
  CHECK(h.phi_kind == "fractional");
  CHECK(h.growth_exponent == doctest::Approx(0.6));
  CHECK(h.phi2_integral_diverges);
  CHECK(h.finite_moment_bound == doctest::Approx(3.0));
  CHECK(h.ratio_decay_rate == doctest::Approx(0.2));
  CHECK_FALSE(h.ratio_condition_holds);

  const auto c = check_hypotheses(PhiFunction::constant(1.0));
  CHECK(c.phi_kind == "constant");
  CHECK(c.phi2_integral_diverges);
  CHECK_FALSE(c.ratio_condition_holds);
}

TEST_CASE("consistency: null case concentrates near zero") {
  ConsistencyConfig c;
  c.phi = PhiFunction::constant(1.0);
  c.theta = 0.0;
  c.horizons = {100.0, 1000.0};
  c.replicas = 200;
  c.seed = 4;
  c.workers = worker_count();
  const auto r = consistency_experiment(c);
  std::vector<double> last;
  for (const auto& row : r.estimates) last.push_back(row.back());
  std::nth_element(last.begin(), last.begin() + last.size() / 2, last.end());
  CHECK(last[last.size() / 2] < 0.05);
}

TEST_CASE("consistency: degenerate sample and worker independence") {
  ConsistencyConfig c;
  c.phi = PhiFunction::constant(1.0);
  c.base_rate = 1e-6;
  c.theta = 0.1;
  c.horizons = {1.0, 2.0};
  c.replicas = 10;
  try {
    consistency_experiment(c);
    FAIL("expected a degenerate sample");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_sample);
  }

  ConsistencyConfig d;
  d.phi = phi_fractional(0.7, 1.0);
  d.horizons = {10.0, 40.0};
  d.replicas = 64;
  d.seed = 8;
  d.workers = 1;
  auto e = d;
  e.workers = 4;
  CHECK(to_json(consistency_experiment(d)).dump() == to_json(consistency_experiment(e)).dump());
}
