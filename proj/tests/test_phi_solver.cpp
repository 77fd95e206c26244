#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fpp/error.hpp"
#include "fpp/phi_solver.hpp"
#include "oracles/oracles.inc"

using namespace fpp;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  v.back() = b;
  return v;
}

const PhiFunction::Grid& nodes_of(const PhiFunction& phi) {
  return std::get<PhiFunction::Grid>(phi.repr());
}

double max_rel_error(const PhiFunction& numeric, const PhiFunction& exact) {
  const auto& g = nodes_of(numeric);
  double err = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double e = exact(g.nodes[i]);
    err = std::max(err, std::abs(g.values[i] - e) / std::abs(e));
  }
  return err;
}

double fractional_error(double hurst, std::size_t n) {
  const auto grid = linspace(0.01, 5.0, n);
  const auto phi = solve_phi_volterra(KernelSpec::fractional(hurst), IntensitySpec::constant(1.0),
                                      1.0, grid);
  return max_rel_error(phi, phi_fractional(hurst, 1.0));
}

}  // namespace

TEST_CASE("closed-form phi") {
  const auto phi = phi_fractional(0.7, 2.0);
  CHECK(std::abs(phi(1.0) - kPhiH07Rate2) < 1e-14);
  const auto unit = phi_fractional(0.7, 1.0);
  CHECK(std::abs(unit(4.0) / unit(1.0) - kPhiRatio4) < 1e-14);
  CHECK(std::abs(phi_fractional(0.5000001, 1.0)(3.0) - 1.0) < 1e-5);
  CHECK(phi.nonnegative());
  CHECK_THROWS_AS(phi_fractional(0.5, 1.0), Error);
  CHECK_THROWS_AS(phi_fractional(1.0, 1.0), Error);
  CHECK_THROWS_AS(phi_fractional(0.7, 0.0), Error);
}

TEST_CASE("closed-form phi satisfies the calibration identity") {
  for (double hurst : {0.55, 0.7, 0.9}) {
    const auto k = KernelSpec::fractional(hurst);
    const auto phi = phi_fractional(hurst, 1.7, 0.6);
    for (double t : {0.01, 1.0, 5.0}) {
      CHECK(std::abs(calibration_residual(k, IntensitySpec::constant(1.7), 0.6, phi, t)) < 1e-9 * t);
    }
  }
}

TEST_CASE("indicator kernel gives a constant phi") {
  const auto grid = linspace(0.01, 5.0, 200);
  const auto phi = solve_phi_volterra(KernelSpec::indicator(), IntensitySpec::constant(2.0), 1.0, grid);
  for (double v : nodes_of(phi).values) CHECK(std::abs(v - 0.5) < 1e-12);
}

TEST_CASE("exponential kernel gives phi = 1 + s") {
  const auto grid = linspace(0.01, 5.0, 500);
  const auto phi =
      solve_phi_volterra(KernelSpec::exp_shot_noise(1.0), IntensitySpec::constant(1.0), 1.0, grid);
  CHECK(max_rel_error(phi, PhiFunction::affine(1.0, 1.0)) < 1e-6);
}

TEST_CASE("fractional kernel: 2000 nodes within 1e-2, 8000 nodes more accurate") {
  const double coarse = fractional_error(0.7, 2000);
  const double fine = fractional_error(0.7, 8000);
  CHECK(coarse <= 1e-2);
  CHECK(fine < coarse);
}

TEST_CASE("fractional family converges under refinement") {
  for (double hurst : {0.55, 0.6, 0.7, 0.8, 0.9}) {
    CAPTURE(hurst);
    const double a = fractional_error(hurst, 250);
    const double b = fractional_error(hurst, 500);
    const double c = fractional_error(hurst, 1000);
    CHECK(c <= 1e-2);
    CHECK(b < a);
    CHECK(c < b);
  }
}

TEST_CASE("residual check at every node") {
  VolterraOptions options;
  options.residual_checks = 0;
  const auto grid = linspace(0.01, 5.0, 300);
  const IntensitySpec rates[] = {IntensitySpec::constant(1.0),
                                 IntensitySpec::scaled_by_phi(1.0, 0.5, phi_fractional(0.7, 1.0))};
  const KernelSpec kernels[] = {KernelSpec::indicator(), KernelSpec::exp_shot_noise(1.0),
                                KernelSpec::fractional(0.7)};
  for (const auto& k : kernels) {
    for (const auto& lambda : rates) {
      CAPTURE(k.name());
      const auto sol = solve_phi_volterra_detailed(k, lambda, 1.3, grid, options);
      CHECK(sol.check_nodes.size() >= grid.size());
      CHECK(sol.max_relative_residual <= 2.0 * options.tolerance);
      for (double t : grid) {
        CHECK(std::abs(calibration_residual(k, lambda, 1.3, sol.phi, t)) <= 2.0 * options.tolerance * t);
      }
    }
  }
}

TEST_CASE("residual shrinks when the step is halved") {
  const auto phi_ref = phi_fractional(0.7, 1.0);
  struct Case {
    KernelSpec kernel;
    IntensitySpec lambda;
  };
  const Case cases[] = {
      {KernelSpec::fractional(0.7), IntensitySpec::constant(1.0)},
      {KernelSpec::exp_shot_noise(1.0), IntensitySpec::scaled_by_phi(1.0, 0.5, phi_ref)},
      {KernelSpec::fractional(0.8), IntensitySpec::scaled_by_phi(1.0, 0.5, phi_ref)},
  };
  VolterraOptions options;
  options.residual_checks = 0;
  for (const auto& c : cases) {
    CAPTURE(c.kernel.name());
    double previous = INFINITY;
    for (std::size_t n : {100, 200, 400}) {
      const auto sol =
          solve_phi_volterra_detailed(c.kernel, c.lambda, 1.0, linspace(0.05, 5.0, n), options);
      CHECK(sol.max_relative_residual < previous);
      previous = sol.max_relative_residual;
    }
  }
}

TEST_CASE("solver preconditions and singular systems") {
  const auto lambda = IntensitySpec::constant(1.0);
  const std::vector<double> starts_at_zero{0.0, 1.0, 2.0};
  const std::vector<double> decreasing{1.0, 0.5};
  CHECK_THROWS_AS(solve_phi_volterra(KernelSpec::indicator(), lambda, 1.0, starts_at_zero), Error);
  CHECK_THROWS_AS(solve_phi_volterra(KernelSpec::indicator(), lambda, 1.0, decreasing), Error);
  CHECK_THROWS_AS(solve_phi_volterra(KernelSpec::indicator(), lambda, 0.0, linspace(0.1, 1.0, 5)),
                  Error);

  TabulatedKernel zero;
  zero.t_grid = {0.0, 10.0};
  zero.s_grid = {0.0, 10.0};
  zero.values.assign(4, 0.0);
  try {
    solve_phi_volterra(KernelSpec::tabulated(zero), lambda, 1.0, linspace(0.1, 5.0, 20));
    FAIL("expected a singular system");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_system);
  }
}

TEST_CASE("tabulated kernel reproduces the exponential solution") {
  TabulatedKernel table;
  table.t_grid = linspace(0.0, 3.0, 301);
  table.s_grid = table.t_grid;
  for (double t : table.t_grid) {
    for (double s : table.s_grid) table.values.push_back(s <= t ? std::exp(-(t - s)) : 0.0);
  }
  // Between table lines the kernel is bilinear, so off-node residuals are
  // O(table step) and the residual tolerance follows the 0.01 table step.
  VolterraOptions options;
  options.tolerance = 1e-3;
  const auto phi = solve_phi_volterra(KernelSpec::tabulated(table), IntensitySpec::constant(1.0),
                                      1.0, linspace(0.01, 3.0, 300), options);
  CHECK(max_rel_error(phi, PhiFunction::affine(1.0, 1.0)) < 1e-3);
}

TEST_CASE("phi CSV round trip") {
  const auto grid = linspace(0.01, 5.0, 100);
  const auto phi = solve_phi_volterra(KernelSpec::fractional(0.7), IntensitySpec::constant(1.0),
                                      1.0, grid);
  std::stringstream s;
  write_csv(s, phi);
  CHECK(s.str().rfind("s,phi\n", 0) == 0);
  const auto back = read_phi_csv(s, phi.origin_exponent());
  CHECK(nodes_of(back).nodes == nodes_of(phi).nodes);
  CHECK(nodes_of(back).values == nodes_of(phi).values);
  CHECK(back(2.345) == phi(2.345));
}
