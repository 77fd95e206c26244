#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fpp/error.hpp"

namespace fpp::quad {

namespace detail {
inline std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}
}  // namespace detail

struct Result {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive 15-point Gauss-Kronrod on [a, b]: the subinterval with
/// the largest error estimate is bisected until the summed estimate is below
/// max(rel_tol * L1, abs_tol, 50 eps L1). The integrand is never evaluated
/// at the endpoints. Throws ErrorKind::non_convergence past max_intervals.
template <class F>
Result adaptive(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                std::size_t max_intervals = 4000) {
  struct Piece {
    double lo, hi, value, error, l1;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  auto piece = [&](double lo, double hi) {
    Piece p{lo, hi, 0.0, 0.0, 0.0};
    p.value = rule::integrate(f, lo, hi, 0, 0.0, &p.error, &p.l1);
    // Boost reports the single-level error on [-1, 1] without the half-width.
    p.error *= 0.5 * (hi - lo);
    return p;
  };
  Result r;
  if (a == b) return r;
  std::priority_queue<Piece> heap;
  heap.push(piece(a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  double l1 = heap.top().l1;
  auto done = [&] {
    return error <= std::max({rel_tol * l1, abs_tol, 50.0 * std::numeric_limits<double>::epsilon() * l1});
  };
  while (!done()) {
    if (heap.size() >= max_intervals || !std::isfinite(value)) {
      fail(ErrorKind::non_convergence,
           "adaptive quadrature on [" + detail::short_number(a) + ", " + detail::short_number(b) +
               "] reached error estimate " + detail::short_number(error) + " (L1 " +
               detail::short_number(l1) + ")");
    }
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Piece left = piece(worst.lo, mid);
    const Piece right = piece(mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  r.value = value;
  r.error = error;
  return r;
}

/// Fixed n-point Gauss-Legendre rule on [a, b].
template <unsigned N, class F>
double gauss_legendre(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, N>::integrate(f, a, b);
}

/// Integral of f over (0, b] where f(s) ~ s^{-gamma} near 0, gamma < 1.
/// Substitutes s = b v^{3/(1-gamma)}: the leading term becomes v^2 and
/// weaker branches such as s^{-gamma} s^{delta} become C^2 or smoother.
template <class F>
Result origin_singular(F&& f, double b, double gamma, double rel_tol, double abs_tol = 0.0) {
  const double p = 3.0 / (1.0 - gamma);
  auto g = [&](double v) {
    const double s = b * std::pow(v, p);
    return f(s) * (b * p) * std::pow(v, p - 1.0);
  };
  return adaptive(g, 0.0, 1.0, rel_tol, abs_tol);
}

/// Integral of f over [a, t) where f(s) ~ (t - s)^{alpha} near t, alpha > -1.
/// Substitutes t - s = (t - a) v^{3/(1+alpha)}.
template <class F>
Result diagonal_singular(F&& f, double a, double t, double alpha, double rel_tol,
                         double abs_tol = 0.0) {
  const double p = 3.0 / (1.0 + alpha);
  const double h = t - a;
  auto g = [&](double v) {
    const double s = t - h * std::pow(v, p);
    return f(s) * (h * p) * std::pow(v, p - 1.0);
  };
  return adaptive(g, 0.0, 1.0, rel_tol, abs_tol);
}

}  // namespace fpp::quad
