#pragma once

namespace fpp {

/// Parameters of the Gauss hypergeometric function F(a, b; c; z).
struct Hyp2F1Params {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double z = 0.0;
};

/// ln Gamma(x) for x > 0. Throws ErrorKind::domain otherwise.
double ln_gamma(double x);

/// F(a, b; c; z) from the Euler integral representation.
///
/// The integral needs c > b > 0; since F is symmetric in (a, b) the pair is
/// swapped when only (b, a) is admissible. Both endpoint singularities are
/// removed by power substitutions before adaptive Gauss-Kronrod quadrature,
/// so the integrand seen by the quadrature is bounded.
///
/// Requires z < 1 and c not a non-positive integer. F = 1 is returned without
/// quadrature when z == 0 or either of a, b is 0.
double hyp2f1(const Hyp2F1Params& p);

/// F(a, b; c; z) from the Gauss series. For z < 0 the Pfaff transform
/// F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1)) is applied first so the
/// series argument lies in [0, 1). Convergence is slow when that argument
/// approaches 1; ErrorKind::non_convergence is thrown past the term cap.
double hyp2f1_series(const Hyp2F1Params& p);

}  // namespace fpp
