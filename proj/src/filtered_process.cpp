#include "fpp/filtered_process.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "fpp/csv.hpp"
#include "fpp/error.hpp"

namespace fpp {

namespace {

void check_time(const MarkedPath& path, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::domain, "evaluation time must be >= 0");
  if (t > path.horizon) {
    fail(ErrorKind::domain, "evaluation time " + std::to_string(t) + " beyond horizon " +
                                std::to_string(path.horizon));
  }
}

void check_grid(std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) fail(ErrorKind::domain, "grid must be strictly increasing");
  }
}

}  // namespace

double eval_filtered(const MarkedPath& path, const KernelSpec& kernel, double t) {
  check_time(path, t);
  double sum = 0.0;
  for (std::size_t n = 0; n < path.size() && path.jump_times[n] <= t; ++n) {
    sum += path.marks[n] * kernel(t, path.jump_times[n]);
  }
  return sum;
}

double eval_compensated(const MarkedPath& path, const KernelSpec& kernel,
                        const IntensitySpec& intensity, double m1, double t) {
  const double jumps = eval_filtered(path, kernel, t);
  if (t == 0.0) return jumps;
  return jumps - m1 * kernel_lambda_integral(kernel, intensity, t);
}

double eval_observed(const MarkedPath& path, const KernelSpec& kernel,
                     const IntensitySpec& intensity, double m1, double theta, double t) {
  return eval_compensated(path, kernel, intensity, m1, t) - theta * t;
}

PathOnGrid filtered_on_grid(const MarkedPath& path, const KernelSpec& kernel,
                            std::span<const double> grid) {
  check_grid(grid);
  PathOnGrid out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  out.kernel = kernel;

  if (const auto* e = std::get_if<ExpShotNoiseKernel>(&kernel.repr())) {
    double value = 0.0;
    double now = 0.0;
    std::size_t n = 0;
    for (double t : grid) {
      check_time(path, t);
      value *= std::exp(-e->rate * (t - now));
      for (; n < path.size() && path.jump_times[n] <= t; ++n) {
        value += path.marks[n] * std::exp(-e->rate * (t - path.jump_times[n]));
      }
      now = t;
      out.values.push_back(value);
    }
    return out;
  }
  for (double t : grid) out.values.push_back(eval_filtered(path, kernel, t));
  return out;
}

PathOnGrid observed_on_grid(const MarkedPath& path, const KernelSpec& kernel,
                            const IntensitySpec& intensity, double m1, double theta,
                            std::span<const double> grid) {
  PathOnGrid out = filtered_on_grid(path, kernel, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t > 0.0) out.values[i] -= m1 * kernel_lambda_integral(kernel, intensity, t);
    out.values[i] -= theta * t;
  }
  out.compensated = true;
  out.drift_theta = theta;
  return out;
}

void write_csv(std::ostream& out, const PathOnGrid& path) {
  out << "t,value\n";
  for (std::size_t i = 0; i < path.grid.size(); ++i) {
    csv::write_row(out, {path.grid[i], path.values[i]});
  }
}

}  // namespace fpp
