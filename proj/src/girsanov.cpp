#include "fpp/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fpp/csv.hpp"
#include "fpp/error.hpp"
#include "fpp/filtered_process.hpp"
#include "fpp/parallel.hpp"
#include "fpp/quadrature.hpp"

namespace fpp {

ShiftFunction ShiftFunction::constant(double value) {
  if (!std::isfinite(value)) fail(ErrorKind::domain, "shift must be finite");
  return ShiftFunction(value, std::nullopt);
}

ShiftFunction ShiftFunction::scaled_phi(double scale, PhiFunction phi) {
  if (!std::isfinite(scale)) fail(ErrorKind::domain, "shift scale must be finite");
  return ShiftFunction(scale, std::move(phi));
}

double ShiftFunction::operator()(double s) const {
  if (scale_ == 0.0) return 0.0;
  return phi_ ? scale_ * (*phi_)(s) : scale_;
}

void ShiftFunction::validate(double horizon) const {
  if (scale_ == 0.0) return;
  if (phi_ && !phi_->nonnegative()) {
    fail(ErrorKind::domain, "shift h = scale * phi needs a nonnegative phi");
  }
  if (scale_ > 0.0) return;
  const double sup = phi_ ? phi_->upper_bound(0.0, horizon) : 1.0;
  if (!(1.0 + scale_ * sup > 0.0)) {
    fail(ErrorKind::domain, "shift must satisfy h > -1 on (0, " + csv::format(horizon) +
                                "]; inf h = " + csv::format(scale_ * sup));
  }
}

double ShiftFunction::integrated(const IntensitySpec& intensity, double t) const {
  if (!(t >= 0.0)) fail(ErrorKind::domain, "shift integral needs t >= 0");
  if (scale_ == 0.0 || t == 0.0) return 0.0;
  const double base = intensity.base_rate();
  const double own = phi_ ? phi_->integral(0.0, t) : t;
  if (intensity.kind() == IntensitySpec::Kind::constant) return base * scale_ * own;
  const PhiFunction& psi = *intensity.phi();
  const double cross = phi_ ? integral_of_product(*phi_, psi, t) : psi.integral(0.0, t);
  return base * scale_ * (own + intensity.theta() * cross);
}

double ShiftFunction::abs_integrated(const IntensitySpec& intensity, double t) const {
  if (!phi_ || phi_->nonnegative()) return std::abs(integrated(intensity, t));
  auto f = [&](double s) { return std::abs((*this)(s)) * intensity(s); };
  return quad::origin_singular(f, t, origin_exponent() + intensity.origin_exponent(), 1e-10, 1e-300)
      .value;
}

double log_density(const MarkedPath& path, const ShiftFunction& h, const IntensitySpec& intensity,
                   double t) {
  if (!(t >= 0.0) || t > path.horizon) {
    fail(ErrorKind::domain, "log_density needs 0 <= t <= horizon");
  }
  double jumps = 0.0;
  for (std::size_t j = 0; j < path.size() && path.jump_times[j] <= t; ++j) {
    const double hj = h(path.jump_times[j]);
    if (!(1.0 + hj > 0.0)) {
      fail(ErrorKind::domain, "1 + h(T_j) = " + csv::format(1.0 + hj) + " <= 0 at jump " +
                                  std::to_string(j));
    }
    jumps += std::log1p(hj);
  }
  return jumps - h.integrated(intensity, t);
}

double density(const MarkedPath& path, const ShiftFunction& h, const IntensitySpec& intensity,
               double t) {
  return std::exp(log_density(path, h, intensity, t));
}

namespace {

double kernel_shift(const KernelSpec& kernel, const ShiftFunction& h,
                    const IntensitySpec& intensity, double m1, double t) {
  if (h.is_zero() || t == 0.0) return 0.0;
  return m1 * kernel_weighted_integral(
                  kernel, t, [&](double s) { return h(s) * intensity(s); },
                  h.origin_exponent() + intensity.origin_exponent(), 1e-9);
}

}  // namespace

double shifted_compensated(const MarkedPath& path, const KernelSpec& kernel, const ShiftFunction& h,
                           const IntensitySpec& intensity, double m1, double t) {
  return eval_compensated(path, kernel, intensity, m1, t) - kernel_shift(kernel, h, intensity, m1, t);
}

namespace {

constexpr double kPassSigmas = 4.0;
constexpr double kKsLevel = 0.99;
constexpr double kMinEffectiveSize = 100.0;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Weighted mean of x against unweighted mean of y on paired replicas.
MomentComparison compare_moments(const std::vector<double>& w, const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const std::size_t n = w.size();
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const double wbar = wsum / static_cast<double>(n);
  MomentComparison m;
  for (std::size_t r = 0; r < n; ++r) {
    m.weighted += w[r] * x[r];
    m.unweighted += y[r];
  }
  m.weighted /= wsum;
  m.unweighted /= static_cast<double>(n);
  double va = 0.0, vb = 0.0, vd = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double a = w[r] * (x[r] - m.weighted);
    const double b = y[r] - m.unweighted;
    va += a * a;
    vb += b * b;
    const double psi = a / wbar - b;  // linearized contribution to the discrepancy
    vd += psi * psi;
  }
  const double nn = static_cast<double>(n);
  m.weighted_se = std::sqrt(va) / wsum;
  m.unweighted_se = std::sqrt(vb / (nn - 1.0) / nn);
  m.discrepancy = m.weighted - m.unweighted;
  m.combined_se = std::sqrt(vd / (nn - 1.0) / nn);
  m.pass = std::abs(m.discrepancy) <= kPassSigmas * m.combined_se;
  return m;
}

struct Entry {
  double value;
  std::uint32_t replica;
  bool weighted;  // true for sample A
};

// Merged sort order of both samples; ties are kept adjacent.
std::vector<Entry> merge_samples(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<Entry> e;
  e.reserve(a.size() + b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    e.push_back({a[r], static_cast<std::uint32_t>(r), true});
    e.push_back({b[r], static_cast<std::uint32_t>(r), false});
  }
  std::sort(e.begin(), e.end(), [](const Entry& l, const Entry& r) {
    if (l.value != r.value) return l.value < r.value;
    if (l.replica != r.replica) return l.replica < r.replica;
    return l.weighted && !r.weighted;
  });
  return e;
}

// sup_x |F_A(x) - F_B(x)| with F_A weighted by w.
double ks_statistic(const std::vector<Entry>& order, const std::vector<double>& w) {
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const double n = static_cast<double>(w.size());
  double fa = 0.0, fb = 0.0, sup = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Entry& e = order[k];
    if (e.weighted) {
      fa += w[e.replica] / wsum;
    } else {
      fb += 1.0 / n;
    }
    if (k + 1 == order.size() || order[k + 1].value != e.value) sup = std::max(sup, std::abs(fa - fb));
  }
  return sup;
}

// 99% quantile of sup_x |(F*_A - F_A) - (F*_B - F_B)| over paired bootstrap
// resamples of the replicas.
double ks_threshold(const std::vector<Entry>& order, const std::vector<double>& w,
                    std::size_t resamples, std::uint64_t seed, unsigned workers) {
  const std::size_t n = w.size();
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const double nn = static_cast<double>(n);
  std::vector<double> stats(resamples);
  parallel_for(resamples, workers, [&](std::size_t b) {
    std::mt19937_64 rng(derive_seed(seed, 1, b));
    std::vector<std::uint32_t> count(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto pick = static_cast<std::size_t>(uniform01(rng) * nn);
      ++count[std::min(pick, n - 1)];
    }
    double wstar = 0.0;
    for (std::size_t r = 0; r < n; ++r) wstar += count[r] * w[r];
    double da = 0.0, db = 0.0, sup = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Entry& e = order[k];
      if (e.weighted) {
        da += w[e.replica] * (count[e.replica] / wstar - 1.0 / wsum);
      } else {
        db += (count[e.replica] - 1.0) / nn;
      }
      if (k + 1 == order.size() || order[k + 1].value != e.value) {
        sup = std::max(sup, std::abs(da - db));
      }
    }
    stats[b] = sup;
  });
  std::sort(stats.begin(), stats.end());
  const auto idx = static_cast<std::size_t>(std::ceil(kKsLevel * static_cast<double>(resamples))) - 1;
  return stats[std::min(idx, resamples - 1)];
}

}  // namespace

LawComparisonReport verify_equality_in_law(const LawComparisonConfig& c) {
  if (!c.kernel.diagonal_degenerate()) {
    fail(ErrorKind::precondition,
         "equality in law needs a kernel degenerate on the diagonal; " + c.kernel.name() +
             " has K(t,t) != 0");
  }
  if (c.replicas < 2) fail(ErrorKind::domain, "law comparison needs at least 2 replicas");
  if (c.bootstrap < 1) fail(ErrorKind::domain, "law comparison needs at least 1 bootstrap resample");
  if (c.eval_times.empty()) fail(ErrorKind::domain, "law comparison needs evaluation times");
  for (double t : c.eval_times) {
    if (!(t > 0.0 && t <= c.horizon)) {
      fail(ErrorKind::domain, "evaluation time " + csv::format(t) + " outside (0, horizon]");
    }
  }
  c.h.validate(c.horizon);

  const std::size_t nt = c.eval_times.size();
  const double m1 = c.marks.mean;
  std::vector<double> compensator(nt), shift(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    compensator[k] = m1 * kernel_lambda_integral(c.kernel, c.intensity, c.eval_times[k]);
    shift[k] = kernel_shift(c.kernel, c.h, c.intensity, m1, c.eval_times[k]);
  }

  // a[k][r]: compensated process at time k on replica r.
  std::vector<std::vector<double>> a(nt, std::vector<double>(c.replicas));
  std::vector<double> w(c.replicas);
  parallel_for(c.replicas, c.workers, [&](std::size_t r) {
    const MarkedPath path = simulate(c.intensity, c.marks, c.horizon, derive_seed(c.seed, 0, r));
    for (std::size_t k = 0; k < nt; ++k) {
      a[k][r] = eval_filtered(path, c.kernel, c.eval_times[k]) - compensator[k];
    }
    w[r] = density(path, c.h, c.intensity, c.horizon);
  });

  LawComparisonReport rep;
  rep.replicas = c.replicas;
  rep.bootstrap = c.bootstrap;
  rep.seed = c.seed;
  const double nn = static_cast<double>(c.replicas);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  double w2 = 0.0;
  for (double x : w) w2 += x * x;
  rep.effective_sample_size = wsum * wsum / w2;
  if (!(rep.effective_sample_size >= kMinEffectiveSize)) {
    fail(ErrorKind::degenerate_weights,
         "effective sample size " + csv::format(rep.effective_sample_size) + " is below 100");
  }
  rep.weight_mean = wsum / nn;
  double wv = 0.0;
  for (double x : w) wv += (x - rep.weight_mean) * (x - rep.weight_mean);
  rep.weight_se = std::sqrt(wv / (nn - 1.0) / nn);
  rep.weight_pass = std::abs(rep.weight_mean - 1.0) <= kPassSigmas * rep.weight_se;

  rep.passed = rep.weight_pass;
  for (std::size_t k = 0; k < nt; ++k) {
    TimeComparison tc;
    tc.time = c.eval_times[k];
    tc.shift = shift[k];
    std::vector<double> b(c.replicas), a2(c.replicas), b2(c.replicas);
    for (std::size_t r = 0; r < c.replicas; ++r) {
      b[r] = a[k][r] - shift[k];
      a2[r] = a[k][r] * a[k][r];
      b2[r] = b[r] * b[r];
    }
    tc.first = compare_moments(w, a[k], b);
    tc.second = compare_moments(w, a2, b2);
    const auto order = merge_samples(a[k], b);
    tc.ks_statistic = ks_statistic(order, w);
    tc.ks_threshold = ks_threshold(order, w, c.bootstrap, derive_seed(c.seed, 2, k), c.workers);
    tc.ks_pass = tc.ks_statistic <= tc.ks_threshold;
    rep.passed = rep.passed && tc.first.pass && tc.second.pass && tc.ks_pass;
    rep.times.push_back(tc);
  }
  return rep;
}

namespace {

nlohmann::ordered_json to_json(const MomentComparison& m) {
  return {{"weighted", m.weighted},       {"weighted_se", m.weighted_se},
          {"unweighted", m.unweighted},   {"unweighted_se", m.unweighted_se},
          {"discrepancy", m.discrepancy}, {"combined_se", m.combined_se},
          {"pass", m.pass}};
}

}  // namespace

nlohmann::ordered_json to_json(const LawComparisonReport& r) {
  nlohmann::ordered_json times = nlohmann::ordered_json::array();
  for (const auto& t : r.times) {
    times.push_back({{"time", t.time},
                     {"shift", t.shift},
                     {"first_moment", to_json(t.first)},
                     {"second_moment", to_json(t.second)},
                     {"ks_statistic", t.ks_statistic},
                     {"ks_threshold", t.ks_threshold},
                     {"ks_pass", t.ks_pass}});
  }
  return {{"passed", r.passed},
          {"replicas", r.replicas},
          {"bootstrap_resamples", r.bootstrap},
          {"seed", r.seed},
          {"effective_sample_size", r.effective_sample_size},
          {"weight_mean", r.weight_mean},
          {"weight_se", r.weight_se},
          {"weight_pass", r.weight_pass},
          {"times", times}};
}

}  // namespace fpp
