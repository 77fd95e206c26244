#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fpp/error.hpp"
#include "fpp/filtered_process.hpp"
#include "fpp/parallel.hpp"

using namespace fpp;

namespace {

MarkedPath make_path(std::vector<double> t, std::vector<double> z, double horizon) {
  MarkedPath p;
  p.jump_times = std::move(t);
  p.marks = std::move(z);
  p.horizon = horizon;
  return p;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("empty path") {
  const auto p = make_path({}, {}, 5.0);
  for (double t : {0.0, 1.0, 5.0}) {
    CHECK(eval_filtered(p, KernelSpec::fractional(0.7), t) == 0.0);
    CHECK(eval_filtered(p, KernelSpec::indicator(), t) == 0.0);
  }
}

TEST_CASE("indicator kernel with unit marks counts jumps") {
  const auto p = simulate(IntensitySpec::constant(1.0), {}, 20.0, 4);
  for (double t : linspace(0.0, 20.0, 41)) {
    std::size_t n = 0;
    for (double s : p.jump_times) n += s <= t;
    CHECK(eval_filtered(p, KernelSpec::indicator(), t) == static_cast<double>(n));
    CHECK(eval_compensated(p, KernelSpec::indicator(), IntensitySpec::constant(1.0), 1.0, t) ==
          doctest::Approx(static_cast<double>(n) - t).epsilon(1e-12));
  }
}

TEST_CASE("single exponential shot") {
  const auto p = make_path({1.0}, {2.0}, 5.0);
  CHECK(std::abs(eval_filtered(p, KernelSpec::exp_shot_noise(1.0), 3.0) - 2.0 * std::exp(-2.0)) <
        1e-15);
}

TEST_CASE("compensated and observed arithmetic") {
  const auto p = make_path({0.5, 1.5}, {1.0, 3.0}, 4.0);
  const auto k = KernelSpec::fractional(0.7);
  const auto lambda = IntensitySpec::constant(1.3);
  CHECK(eval_compensated(p, k, lambda, 2.0, 0.0) == 0.0);
  const double c = eval_compensated(p, k, lambda, 2.0, 2.0);
  CHECK(eval_observed(p, k, lambda, 2.0, 0.0, 2.0) == c);
  CHECK(eval_observed(p, k, lambda, 2.0, 1.0, 2.0) == doctest::Approx(c - 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_filtered(p, k, 4.5), Error);
}

TEST_CASE("exponential recursion matches the direct sum") {
  const auto p = simulate(IntensitySpec::constant(3.0), MarkDistributionSpec::exponential(1.0),
                          30.0, 8);
  const auto k = KernelSpec::exp_shot_noise(0.8);
  const auto grid = linspace(0.0, 30.0, 601);
  const auto fast = filtered_on_grid(p, k, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double direct = eval_filtered(p, k, grid[i]);
    CHECK(std::abs(fast.values[i] - direct) <= 1e-12 * std::max(1.0, direct));
  }
}

TEST_CASE("linearity under superposition of disjoint paths") {
  const auto a = simulate(IntensitySpec::constant(1.0), MarkDistributionSpec::exponential(1.0),
                          10.0, 1);
  const auto b = simulate(IntensitySpec::constant(1.0), MarkDistributionSpec::exponential(1.0),
                          10.0, 2);
  MarkedPath u;
  u.horizon = 10.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    const bool take_a = j == b.size() || (i < a.size() && a.jump_times[i] < b.jump_times[j]);
    u.jump_times.push_back(take_a ? a.jump_times[i] : b.jump_times[j]);
    u.marks.push_back(take_a ? a.marks[i++] : b.marks[j++]);
  }
  for (const auto& k : {KernelSpec::fractional(0.8), KernelSpec::exp_shot_noise(2.0)}) {
    for (double t : linspace(0.0, 10.0, 21)) {
      const double sum = eval_filtered(a, k, t) + eval_filtered(b, k, t);
      CHECK(eval_filtered(u, k, t) == doctest::Approx(sum).epsilon(1e-13));
    }
  }
}

TEST_CASE("path regularity across a jump") {
  const auto p = make_path({1.0}, {1.5}, 2.0);
  const auto frac = KernelSpec::fractional(0.7);
  // The step across the jump shrinks like eps^{H - 1/2}.
  double previous = 1.0;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double step = eval_filtered(p, frac, 1.0 + eps) - eval_filtered(p, frac, 1.0 - eps);
    CHECK(step < previous);
    if (eps < 1e-2) CHECK(step / previous == doctest::Approx(std::pow(1e-2, 0.2)).epsilon(0.02));
    previous = step;
  }
  const auto ind = KernelSpec::indicator();
  CHECK(eval_filtered(p, ind, 1.0) - eval_filtered(p, ind, std::nextafter(1.0, 0.0)) == 1.5);
}

TEST_CASE("compensated process has mean zero") {
  const auto k = KernelSpec::fractional(0.7);
  const auto lambda = IntensitySpec::constant(1.0);
  const auto marks = MarkDistributionSpec::exponential(1.5);
  const std::size_t replicas = 10000;
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    const auto p = simulate(lambda, marks, 3.0, derive_seed(17, 0, r));
    const double v = eval_compensated(p, k, lambda, 1.5, 3.0);
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(replicas);
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean) < 4.0 * se);
}

TEST_CASE("observed grid carries its tags and serializes") {
  const auto p = make_path({0.5}, {1.0}, 2.0);
  const auto grid = linspace(0.0, 2.0, 5);
  const auto x = observed_on_grid(p, KernelSpec::indicator(), IntensitySpec::constant(1.0), 1.0,
                                  0.25, grid);
  CHECK(x.compensated);
  CHECK(x.drift_theta == 0.25);
  CHECK(x.values[4] == doctest::Approx(1.0 - 2.0 - 0.5));
  std::ostringstream out;
  write_csv(out, x);
  CHECK(out.str().rfind("t,value\n", 0) == 0);
  const std::vector<double> bad{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(filtered_on_grid(p, KernelSpec::indicator(), bad), Error);
}
