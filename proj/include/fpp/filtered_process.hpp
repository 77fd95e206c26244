#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "fpp/kernels.hpp"
#include "fpp/point_process.hpp"

namespace fpp {

/// A process sampled on a time grid, tagged with what it represents.
struct PathOnGrid {
  std::vector<double> grid;
  std::vector<double> values;
  KernelSpec kernel = KernelSpec::indicator();
  bool compensated = false;
  double drift_theta = 0.0;
};

/// N^K_t = sum_{T_n <= t} Z_n K(t, T_n).
double eval_filtered(const MarkedPath& path, const KernelSpec& kernel, double t);

/// N^K_t - m1 * int_0^t K(t,s) lambda(s) ds.
double eval_compensated(const MarkedPath& path, const KernelSpec& kernel,
                        const IntensitySpec& intensity, double m1, double t);

/// Compensated process minus theta * t.
double eval_observed(const MarkedPath& path, const KernelSpec& kernel,
                     const IntensitySpec& intensity, double m1, double theta, double t);

/// N^K on a grid. Exponential kernels use the recursion
/// v(t + dt) = v(t) e^{-a dt} + new jumps; all others use the direct sum.
PathOnGrid filtered_on_grid(const MarkedPath& path, const KernelSpec& kernel,
                            std::span<const double> grid);

/// Compensated (theta = 0) or observed process on a grid.
PathOnGrid observed_on_grid(const MarkedPath& path, const KernelSpec& kernel,
                            const IntensitySpec& intensity, double m1, double theta,
                            std::span<const double> grid);

/// CSV with header "t,value".
void write_csv(std::ostream& out, const PathOnGrid& path);

}  // namespace fpp
