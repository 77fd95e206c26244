#include "fpp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>

#include "fpp/csv.hpp"
#include "fpp/error.hpp"
#include "fpp/parallel.hpp"

namespace fpp {

double phi_lambda_integral(const PhiFunction& phi, const IntensitySpec& intensity, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::domain, "phi-lambda integral needs t >= 0");
  const double own = phi.integral(0.0, t);
  if (intensity.kind() == IntensitySpec::Kind::constant) return intensity.base_rate() * own;
  return intensity.base_rate() *
         (own + intensity.theta() * integral_of_product(phi, *intensity.phi(), t));
}

namespace {

// phi(T_j) for the jumps with T_j <= t.
std::vector<double> phi_at_jumps(const MarkedPath& path, const PhiFunction& phi, double t) {
  std::vector<double> v;
  for (std::size_t j = 0; j < path.size() && path.jump_times[j] <= t; ++j) {
    v.push_back(phi(path.jump_times[j]));
  }
  return v;
}

ScoreValue score_from(std::span<const double> phis, double integral, double theta) {
  ScoreValue s;
  for (double p : phis) {
    const double d = 1.0 + theta * p;
    s.f += std::log1p(theta * p);
    s.f_prime += p / d;
    s.f_second -= (p / d) * (p / d);
  }
  s.f -= theta * integral;
  s.f_prime -= integral;
  return s;
}

double derivative(std::span<const double> phis, double integral, double theta, double* second) {
  double fp = -integral;
  double fpp = 0.0;
  for (double p : phis) {
    const double q = p / (1.0 + theta * p);
    fp += q;
    fpp -= q * q;
  }
  if (second) *second = fpp;
  return fp;
}

constexpr double kBracketLimit = 1e12;
constexpr int kMaxIterations = 200;

double solve_from(std::span<const double> phis, double integral) {
  if (phis.empty()) return 0.0;
  if (derivative(phis, integral, 0.0, nullptr) <= 0.0) return 0.0;

  double sum = 0.0;
  for (double p : phis) sum += p;
  const double guess = (integral > 0.0 ? std::max(sum / integral - 1.0, 0.0) : 0.0) + 0.1;

  double lo = 0.0;
  double hi = std::max(1.0, guess);
  while (derivative(phis, integral, hi, nullptr) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kBracketLimit) {
      fail(ErrorKind::bracket_failure,
           "score derivative stays positive up to theta = 1e12; int phi lambda = " +
               csv::format(integral));
    }
  }

  double theta = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int it = 0; it < kMaxIterations; ++it) {
    double fpp = 0.0;
    const double fp = derivative(phis, integral, theta, &fpp);
    if (fp == 0.0) return theta;
    if (fp > 0.0) {
      lo = theta;
    } else {
      hi = theta;
    }
    double next = theta - fp / fpp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, theta);
    if (std::abs(next - theta) <= tol || hi - lo <= tol) return next;
    theta = next;
  }
  fail(ErrorKind::non_convergence, "safeguarded Newton did not converge in 200 iterations");
}

}  // namespace

ScoreValue score(const MarkedPath& path, const PhiFunction& phi, const IntensitySpec& intensity,
                 double theta, double t) {
  if (!(theta >= 0.0)) fail(ErrorKind::domain, "score needs theta >= 0");
  if (!(t > 0.0) || t > path.horizon) fail(ErrorKind::domain, "score needs 0 < t <= horizon");
  const auto phis = phi_at_jumps(path, phi, t);
  return score_from(phis, phi_lambda_integral(phi, intensity, t), theta);
}

double mle_solve(const MarkedPath& path, const PhiFunction& phi, const IntensitySpec& intensity,
                 double t) {
  if (!(t > 0.0) || t > path.horizon) fail(ErrorKind::domain, "mle_solve needs 0 < t <= horizon");
  const auto phis = phi_at_jumps(path, phi, t);
  return solve_from(phis, phi_lambda_integral(phi, intensity, t));
}

EstimateTrace trajectory(const MarkedPath& path, const PhiFunction& phi,
                         const IntensitySpec& intensity, const std::vector<double>& grid) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || grid[k] > path.horizon) {
      fail(ErrorKind::domain, "trajectory grid must lie in (0, horizon]");
    }
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      fail(ErrorKind::domain, "trajectory grid must increase");
    }
  }
  EstimateTrace trace;
  if (grid.empty()) return trace;
  const auto phis = phi_at_jumps(path, phi, grid.back());
  std::size_t seen = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    std::size_t n = seen;
    while (n < phis.size() && path.jump_times[n] <= t) ++n;
    if (n > seen) trace.jump_epochs.push_back(k);
    seen = n;
    trace.times.push_back(t);
    trace.theta_hat.push_back(solve_from(std::span(phis).first(n), phi_lambda_integral(phi, intensity, t)));
  }
  return trace;
}

std::size_t monotonicity_violations(const EstimateTrace& trace, double tol) {
  std::size_t count = 0;
  std::size_t e = 0;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    while (e < trace.jump_epochs.size() && trace.jump_epochs[e] < k) ++e;
    const bool jump = e < trace.jump_epochs.size() && trace.jump_epochs[e] == k;
    if (k > 0 && !jump && trace.theta_hat[k] > trace.theta_hat[k - 1] + tol) ++count;
  }
  return count;
}

void write_csv(std::ostream& out, const EstimateTrace& trace) {
  out << "t,theta_hat,jump\n";
  std::size_t e = 0;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const bool jump = e < trace.jump_epochs.size() && trace.jump_epochs[e] == k;
    if (jump) ++e;
    csv::write_row(out, {trace.times[k], trace.theta_hat[k], jump ? 1.0 : 0.0});
  }
}

HypothesisCheck check_hypotheses(const PhiFunction& phi) {
  HypothesisCheck h;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  if (const auto* f = std::get_if<PhiFunction::Fractional>(&phi.repr())) {
    const double g = f->hurst - 0.5;
    h.phi_kind = "fractional";
    h.growth_exponent = 1.0 - 2.0 * g;
    h.phi2_integral_diverges = h.growth_exponent > 0.0;
    h.finite_moment_bound = 1.0 / g - 2.0;
    h.ratio_decay_rate = g;
    h.ratio_condition_holds = false;
    h.note = "phi^{2+j} ~ s^{-(2+j)(H-1/2)} is integrable at 0 only for j < 1/(H-1/2) - 2; "
             "for those j the ratio decays like t^{-j(H-1/2)}, for larger j the numerator is "
             "infinite at every t";
  } else if (const auto* a = std::get_if<PhiFunction::Affine>(&phi.repr())) {
    h.finite_moment_bound = inf;
    if (a->slope == 0.0) {
      h.phi_kind = "constant";
      h.growth_exponent = 1.0;
      h.phi2_integral_diverges = a->intercept != 0.0;
      h.ratio_decay_rate = 0.0;
      h.ratio_condition_holds = a->intercept == 0.0;
      h.note = "the ratio equals phi^j for every t and does not vanish";
    } else {
      h.phi_kind = "affine";
      h.growth_exponent = 3.0;
      h.phi2_integral_diverges = true;
      h.ratio_decay_rate = -1.0;
      h.ratio_condition_holds = false;
      h.note = "phi grows linearly, so the ratio grows like t^j";
    }
  } else {
    h.phi_kind = "grid";
    h.growth_exponent = nan;
    h.finite_moment_bound = nan;
    h.ratio_decay_rate = nan;
    h.note = "not settled for a tabulated phi on a bounded domain";
  }
  return h;
}

ConsistencyReport consistency_experiment(const ConsistencyConfig& c) {
  if (c.horizons.empty()) fail(ErrorKind::domain, "consistency experiment needs horizons");
  for (std::size_t k = 0; k < c.horizons.size(); ++k) {
    if (!(c.horizons[k] > 0.0) || (k > 0 && !(c.horizons[k] > c.horizons[k - 1]))) {
      fail(ErrorKind::domain, "horizons must be positive and increasing");
    }
  }
  if (!(c.theta >= 0.0)) fail(ErrorKind::domain, "true theta must be >= 0");
  if (c.replicas < 2) fail(ErrorKind::domain, "consistency experiment needs at least 2 replicas");
  const double tmax = c.horizons.back();
  if (c.phi.domain_end() < tmax) {
    fail(ErrorKind::domain, "phi is defined only up to " + csv::format(c.phi.domain_end()));
  }

  const auto truth = IntensitySpec::scaled_by_phi(c.base_rate, c.theta, c.phi);
  const auto model = IntensitySpec::constant(c.base_rate);
  std::vector<double> integrals(c.horizons.size());
  for (std::size_t k = 0; k < c.horizons.size(); ++k) {
    integrals[k] = phi_lambda_integral(c.phi, model, c.horizons[k]);
  }

  ConsistencyReport rep;
  rep.estimates.assign(c.replicas, std::vector<double>(c.horizons.size()));
  parallel_for(c.replicas, c.workers, [&](std::size_t r) {
    const MarkedPath path = simulate(truth, c.marks, tmax, derive_seed(c.seed, 0, r));
    if (path.size() == 0) {
      fail(ErrorKind::degenerate_sample,
           "replica " + std::to_string(r) + " has no jump by the largest horizon");
    }
    const auto phis = phi_at_jumps(path, c.phi, tmax);
    std::size_t n = 0;
    for (std::size_t k = 0; k < c.horizons.size(); ++k) {
      while (n < phis.size() && path.jump_times[n] <= c.horizons[k]) ++n;
      rep.estimates[r][k] = solve_from(std::span(phis).first(n), integrals[k]);
    }
  });

  const double nr = static_cast<double>(c.replicas);
  std::size_t decreasing = 0;
  for (const auto& row : rep.estimates) {
    if (std::abs(row.back() - c.theta) < std::abs(row.front() - c.theta)) ++decreasing;
  }
  for (std::size_t k = 0; k < c.horizons.size(); ++k) {
    HorizonSummary s;
    s.horizon = c.horizons[k];
    double sq = 0.0;
    for (const auto& row : rep.estimates) {
      const double e = row[k] - c.theta;
      s.mean_estimate += row[k];
      s.mean_abs_error += std::abs(e);
      sq += e * e;
    }
    s.mean_estimate /= nr;
    s.mean_abs_error /= nr;
    s.rmse = std::sqrt(sq / nr);
    rep.horizons.push_back(s);
  }
  rep.fraction_error_decreasing = static_cast<double>(decreasing) / nr;
  rep.rmse_decreasing = true;
  for (std::size_t k = 1; k < rep.horizons.size(); ++k) {
    rep.rmse_decreasing = rep.rmse_decreasing && rep.horizons[k].rmse < rep.horizons[k - 1].rmse;
  }
  rep.rmse_threshold = c.rmse_threshold;
  rep.final_rmse_below_threshold = rep.horizons.back().rmse < c.rmse_threshold;
  rep.passed = rep.rmse_decreasing && rep.final_rmse_below_threshold;
  rep.hypotheses = check_hypotheses(c.phi);
  rep.replicas = c.replicas;
  rep.seed = c.seed;
  rep.theta = c.theta;
  return rep;
}

nlohmann::ordered_json to_json(const HypothesisCheck& h) {
  auto num = [](double x) -> nlohmann::ordered_json {
    if (std::isfinite(x)) return x;
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return nullptr;
  };
  return {{"phi_kind", h.phi_kind},
          {"phi2_growth_exponent", num(h.growth_exponent)},
          {"phi2_integral_diverges", h.phi2_integral_diverges},
          {"finite_moment_bound", num(h.finite_moment_bound)},
          {"ratio_decay_rate", num(h.ratio_decay_rate)},
          {"ratio_condition_holds", h.ratio_condition_holds},
          {"note", h.note}};
}

nlohmann::ordered_json to_json(const ConsistencyReport& r) {
  nlohmann::ordered_json hs = nlohmann::ordered_json::array();
  for (const auto& h : r.horizons) {
    hs.push_back({{"horizon", h.horizon},
                  {"mean_estimate", h.mean_estimate},
                  {"mean_abs_error", h.mean_abs_error},
                  {"rmse", h.rmse}});
  }
  return {{"passed", r.passed},
          {"theta", r.theta},
          {"replicas", r.replicas},
          {"seed", r.seed},
          {"rmse_decreasing", r.rmse_decreasing},
          {"rmse_threshold", r.rmse_threshold},
          {"final_rmse_below_threshold", r.final_rmse_below_threshold},
          {"fraction_error_decreasing", r.fraction_error_decreasing},
          {"horizons", hs},
          {"hypotheses", to_json(r.hypotheses)},
          {"estimates", r.estimates}};
}

}  // namespace fpp
