#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fpp/kernels.hpp"
#include "fpp/phi_function.hpp"
#include "fpp/point_process.hpp"

namespace fpp {

/// Closed-form phi for the fractional kernel under a constant rate:
/// phi(s) = Gamma(3/2-H) / Gamma(2-2H) * s^{1/2-H} / (lambda * m1).
PhiFunction phi_fractional(double hurst, double lambda, double m1 = 1.0);

struct VolterraOptions {
  /// Advertised relative accuracy of the calibration identity; the solve
  /// aborts when a recomputed residual exceeds twice this value.
  double tolerance = 1e-4;
  /// Number of grid nodes re-checked after the solve (0 = every node); each
  /// is checked together with the midpoint to the previous node.
  std::size_t residual_checks = 64;
  /// Cells within this many steps of the diagonal use adaptive quadrature.
  std::size_t near_band = 16;
  /// Cells within this many steps of the diagonal, or within near_band cells
  /// of the origin, use a 4-point Gauss rule; farther cells interpolate the
  /// kernel through two points per cell.
  std::size_t gauss_band = 64;
};

struct VolterraSolution {
  PhiFunction phi;
  std::vector<double> check_nodes;  // nodes and midpoints, ascending
  std::vector<double> relative_residuals;
  double max_relative_residual = 0.0;
};

/// Solves m1 * int_0^t K(t,s) phi(s) lambda(s) ds = t for t on the grid.
///
/// Product integration with g(s) = phi(s) s^gamma, gamma the kernel's origin
/// exponent, collocated at the grid nodes:
///  - kernels with K(t,t) = 0: g is constant on (0, x_0] and on each cell
///    (x_{j-1}, x_j]; values are reported at the cell midpoints;
///  - other kernels: g is linear between nodes and continues its first
///    segment down to 0; the first two rows form a 2x2 block.
/// Both systems are lower triangular and solved by forward substitution.
/// Throws ErrorKind::singular_system on a diagonal weight below 1e-14 and
/// ErrorKind::non_convergence when the residual check fails.
VolterraSolution solve_phi_volterra_detailed(const KernelSpec& kernel,
                                             const IntensitySpec& intensity, double m1,
                                             std::span<const double> grid,
                                             const VolterraOptions& options = {});

PhiFunction solve_phi_volterra(const KernelSpec& kernel, const IntensitySpec& intensity,
                               double m1, std::span<const double> grid,
                               const VolterraOptions& options = {});

/// m1 * int_0^t K(t,s) phi(s) lambda(s) ds - t, integrated piece by piece
/// between the breakpoints of a grid phi (adaptive for closed forms).
double calibration_residual(const KernelSpec& kernel, const IntensitySpec& intensity, double m1,
                            const PhiFunction& phi, double t);

/// CSV with header "s,phi" holding the grid nodes and values.
void write_csv(std::ostream& out, const PhiFunction& phi);
PhiFunction read_phi_csv(std::istream& in, double origin_exponent = 0.0);

}  // namespace fpp
