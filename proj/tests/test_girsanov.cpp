#include <doctest.h>

#include <cmath>
#include <vector>

#include "fpp/error.hpp"
#include "fpp/filtered_process.hpp"
#include "fpp/girsanov.hpp"
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

// Jump-by-jump product of (1 + h(T_j)), times exp(-int h lambda).
double density_by_recursion(const MarkedPath& p, const ShiftFunction& h,
                            const IntensitySpec& lambda, double t) {
  double r = 1.0;
  for (std::size_t j = 0; j < p.size() && p.jump_times[j] <= t; ++j) r *= 1.0 + h(p.jump_times[j]);
  return r * std::exp(-h.integrated(lambda, t));
}

LawComparisonConfig fractional_config(double scale, std::size_t replicas) {
  LawComparisonConfig c;
  c.kernel = KernelSpec::fractional(0.7);
  c.intensity = IntensitySpec::constant(1.0);
  c.h = ShiftFunction::scaled_phi(scale, phi_fractional(0.7, 1.0));
  c.horizon = 5.0;
  c.eval_times = {1.0, 2.5, 5.0};
  c.replicas = replicas;
  c.seed = 31;
  c.bootstrap = 200;
  c.workers = worker_count();
  return c;
}

}  // namespace

TEST_CASE("zero shift") {
  const auto p = make_path({0.3, 1.1, 2.0}, 3.0);
  const auto h = ShiftFunction::constant(0.0);
  const auto lambda = IntensitySpec::constant(1.0);
  CHECK(log_density(p, h, lambda, 3.0) == 0.0);
  CHECK(density(p, h, lambda, 3.0) == 1.0);
  const auto k = KernelSpec::fractional(0.7);
  CHECK(shifted_compensated(p, k, h, lambda, 1.0, 2.5) == eval_compensated(p, k, lambda, 1.0, 2.5));
}

TEST_CASE("log density arithmetic") {
  const auto p = make_path({1.0, 2.0}, 3.0);
  const double y = log_density(p, ShiftFunction::constant(1.0), IntensitySpec::constant(1.0), 3.0);
  CHECK(std::abs(y - (2.0 * std::log(2.0) - 3.0)) < 1e-14);
}

TEST_CASE("log density rejects 1 + h <= 0 at a jump") {
  const auto p = make_path({1.0}, 3.0);
  CHECK_THROWS_AS(log_density(p, ShiftFunction::constant(-1.0), IntensitySpec::constant(1.0), 3.0),
                  Error);
  CHECK_THROWS_AS(ShiftFunction::constant(-1.5).validate(3.0), Error);
  CHECK_NOTHROW(ShiftFunction::constant(-0.5).validate(3.0));
  CHECK_THROWS_AS(ShiftFunction::scaled_phi(-0.1, phi_fractional(0.7, 1.0)).validate(3.0), Error);
}

TEST_CASE("density equals the jump recursion") {
  const auto phi = phi_fractional(0.7, 1.0);
  const auto lambda = IntensitySpec::constant(1.0);
  const ShiftFunction shifts[] = {ShiftFunction::constant(0.5), ShiftFunction::constant(-0.3),
                                  ShiftFunction::scaled_phi(0.5, phi)};
  for (const auto& h : shifts) {
    for (std::uint64_t r = 0; r < 200; ++r) {
      const auto p = simulate(lambda, {}, 5.0, derive_seed(3, 0, r));
      const double d = density(p, h, lambda, 5.0);
      CHECK(d > 0.0);
      CHECK(std::abs(d - density_by_recursion(p, h, lambda, 5.0)) <= 1e-12 * d);
    }
  }
}

TEST_CASE("density has unit expectation") {
  const auto lambda = IntensitySpec::constant(1.0);
  const auto h = ShiftFunction::constant(0.5);
  const std::size_t replicas = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    const double d = density(simulate(lambda, {}, 5.0, derive_seed(8, 0, r)), h, lambda, 5.0);
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(replicas);
  const double mean = sum / n;
  CHECK(std::abs(mean - 1.0) < 4.0 * std::sqrt((sq / n - mean * mean) / n));
}

TEST_CASE("shift integrals with scaled intensity") {
  const auto psi = PhiFunction::affine(1.0, 1.0);
  const auto lambda = IntensitySpec::scaled_by_phi(2.0, 0.5, psi);
  // int_0^2 0.3 * 2 (1 + 0.5 (1 + s)) ds = 0.6 * (2 + 0.5 * 4)
  CHECK(ShiftFunction::constant(0.3).integrated(lambda, 2.0) == doctest::Approx(2.4).epsilon(1e-12));
  // int_0^2 0.3 (1 + s) * 2 (1 + 0.5 (1 + s)) ds
  const double exact = 0.6 * (4.0 + 0.5 * (26.0 / 3.0));
  CHECK(ShiftFunction::scaled_phi(0.3, psi).integrated(lambda, 2.0) ==
        doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("shifted process for the indicator kernel") {
  const auto p = simulate(IntensitySpec::constant(1.0), {}, 10.0, 12);
  const double c = 0.4;
  for (double t : {0.5, 3.0, 10.0}) {
    double n = 0.0;
    for (double s : p.jump_times) n += s <= t;
    const double v = shifted_compensated(p, KernelSpec::indicator(), ShiftFunction::constant(c),
                                         IntensitySpec::constant(1.0), 1.0, t);
    CHECK(v == doctest::Approx(n - t - c * t).epsilon(1e-9));
  }
}

TEST_CASE("calibrated shift equals the drift") {
  for (double hurst : {0.6, 0.7, 0.9}) {
    const auto lambda = IntensitySpec::constant(1.5);
    const double m1 = 2.0;
    const auto phi = phi_fractional(hurst, 1.5, m1);
    const auto k = KernelSpec::fractional(hurst);
    const auto p = simulate(lambda, MarkDistributionSpec::exponential(m1), 4.0, 6);
    const double theta = 0.7;
    for (double t : {0.5, 2.0, 4.0}) {
      const double shifted =
          shifted_compensated(p, k, ShiftFunction::scaled_phi(theta, phi), lambda, m1, t);
      CHECK(std::abs(shifted - eval_observed(p, k, lambda, m1, theta, t)) < 1e-7 * theta * t);
    }
  }
}

TEST_CASE("law comparison with zero shift is exact") {
  auto c = fractional_config(0.0, 500);
  const auto r = verify_equality_in_law(c);
  CHECK(r.passed);
  CHECK(r.weight_mean == 1.0);
  for (const auto& t : r.times) {
    CHECK(t.shift == 0.0);
    CHECK(t.first.discrepancy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.second.discrepancy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.ks_statistic == 0.0);
  }
}

TEST_CASE("law comparison preconditions") {
  auto c = fractional_config(0.3, 500);
  c.kernel = KernelSpec::indicator();
  try {
    verify_equality_in_law(c);
    FAIL("expected a precondition error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::precondition);
  }
  auto d = fractional_config(25.0, 150);
  try {
    verify_equality_in_law(d);
    FAIL("expected degenerate weights");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_weights);
  }
}

TEST_CASE("reweighting moves the compensated mean by +m1 int K h lambda") {
  const auto r = verify_equality_in_law(fractional_config(0.3, 20000));
  CHECK(r.weight_pass);
  CHECK(std::abs(r.weight_mean - 1.0) < 4.0 * r.weight_se);
  CHECK(r.effective_sample_size > 100.0);
  for (const auto& t : r.times) {
    CAPTURE(t.time);
    // h = 0.3 phi with phi calibrated, so the shift is 0.3 t.
    CHECK(t.shift == doctest::Approx(0.3 * t.time).epsilon(1e-8));
    CHECK(std::abs(t.first.weighted - t.shift) < 4.0 * t.first.weighted_se);
    CHECK(std::abs(t.first.unweighted + t.shift) < 4.0 * t.first.unweighted_se);
  }
  const auto j = to_json(r);
  CHECK(j.contains("times"));
  CHECK(j["replicas"] == 20000);
}

TEST_CASE("law comparison is independent of the worker count") {
  auto a = fractional_config(0.3, 2000);
  auto b = a;
  a.workers = 1;
  b.workers = 3;
  CHECK(to_json(verify_equality_in_law(a)).dump() == to_json(verify_equality_in_law(b)).dump());
}
