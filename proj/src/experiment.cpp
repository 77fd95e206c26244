#include "fpp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "fpp/csv.hpp"
#include "fpp/estimator.hpp"
#include "fpp/filtered_process.hpp"
#include "fpp/girsanov.hpp"
#include "fpp/parallel.hpp"
#include "fpp/phi_solver.hpp"

namespace fpp {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::vector<double> GridSpec::points() const {
  std::vector<double> p(count);
  for (std::size_t i = 0; i < count; ++i) {
    p[i] = count == 1 ? start
                      : start + (stop - start) * static_cast<double>(i) /
                                    static_cast<double>(count - 1);
  }
  if (count > 1) p.back() = stop;
  return p;
}

namespace {

constexpr std::string_view kExperiments[] = {"simulate",        "estimate",    "trajectory",
                                             "verify-girsanov", "consistency", "solve-phi"};

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  fail(ErrorKind::validation, key + ": " + what);
}

void allow_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) invalid(where, "expected a JSON object");
  for (const auto& item : obj.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      invalid(where.empty() ? item.key() : where + "." + item.key(), "unknown key");
    }
  }
}

std::string key_path(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

double number(const json& obj, const std::string& where, std::string_view key,
              std::optional<double> fallback = std::nullopt) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (!fallback) invalid(key_path(where, key), "required key missing");
    return *fallback;
  }
  if (!it->is_number()) invalid(key_path(where, key), "expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) invalid(key_path(where, key), "expected a finite number");
  return v;
}

std::uint64_t integer(const json& obj, const std::string& where, std::string_view key,
                      std::uint64_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const bool ok = it->is_number_unsigned() || (it->is_number_integer() && it->get<std::int64_t>() >= 0);
  if (!ok) invalid(key_path(where, key), "expected a nonnegative integer");
  return it->get<std::uint64_t>();
}

std::string text(const json& obj, const std::string& where, std::string_view key,
                 std::optional<std::string> fallback = std::nullopt) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (!fallback) invalid(key_path(where, key), "required key missing");
    return *fallback;
  }
  if (!it->is_string()) invalid(key_path(where, key), "expected a string");
  return it->get<std::string>();
}

std::vector<double> numbers(const json& obj, std::string_view key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return {};
  if (!it->is_array()) invalid(std::string(key), "expected an array of numbers");
  std::vector<double> v;
  for (const auto& x : *it) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) {
      invalid(std::string(key), "expected an array of finite numbers");
    }
    v.push_back(x.get<double>());
  }
  return v;
}

GridSpec parse_grid(const json& obj, const std::string& where) {
  allow_keys(obj, where, {"start", "stop", "count"});
  GridSpec g;
  g.start = number(obj, where, "start");
  g.stop = number(obj, where, "stop");
  g.count = integer(obj, where, "count", 0);
  return g;
}

void check_grid(const GridSpec& g, const std::string& where) {
  if (g.count == 0) invalid(where + ".count", "must be a positive integer");
  if (!(g.start > 0.0)) invalid(where + ".start", "must be positive");
  if (g.count == 1 ? g.stop != g.start : !(g.stop > g.start)) {
    invalid(where + ".stop", g.count == 1 ? "must equal start for a single point"
                                          : "must exceed start");
  }
}

void check_increasing(const std::vector<double>& v, double horizon, const std::string& key) {
  if (v.empty()) invalid(key, "must not be empty");
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] > 0.0) || v[k] > horizon) invalid(key, "values must lie in (0, horizon]");
    if (k > 0 && !(v[k] > v[k - 1])) invalid(key, "values must increase");
  }
}

bool is(const ExperimentConfig& c, std::string_view name) { return c.experiment == name; }

double mark_mean(const ExperimentConfig& c) { return build_marks(c).mean; }

// phi such that m1 int_0^t K(t,s) phi(s) lambda ds = t for constant lambda.
PhiFunction closed_form_phi(const ExperimentConfig& c) {
  const double scale = 1.0 / (c.intensity.base_rate * mark_mean(c));
  if (c.kernel.kind == "indicator") return PhiFunction::constant(scale);
  if (c.kernel.kind == "exp_shot_noise") return PhiFunction::affine(scale, scale * c.kernel.rate);
  if (c.kernel.kind == "fractional") {
    return phi_fractional(c.kernel.hurst, c.intensity.base_rate, mark_mean(c));
  }
  invalid("h_spec.phi_source", "no closed form for a " + c.kernel.kind + " kernel; use volterra");
}

// Text written at the top of every CSV artifact.
std::string csv_preamble(const ExperimentConfig& c) {
  return "# config " + to_json(c).dump() + "\n";
}

struct Artifacts {
  std::filesystem::path dir;
  std::vector<std::string> names;

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    out << content;
    out.close();
    if (!out) fail(ErrorKind::io, "cannot write " + (dir / name).string());
    names.push_back(name);
  }
};

std::string report_text(const ExperimentConfig& c, bool passed, const ojson& result) {
  ojson doc;
  doc["experiment"] = c.experiment;
  doc["seed"] = c.seed;
  doc["passed"] = passed;
  doc["config"] = to_json(c);
  doc["result"] = result;
  return doc.dump(2) + "\n";
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

struct Outcome {
  bool passed = true;
  ojson result;
  std::string headline;
};

Outcome run_simulate(const ExperimentConfig& c, const std::optional<PhiFunction>& phi,
                     Artifacts& out) {
  const auto kernel = build_kernel(c);
  const auto intensity = build_intensity(c, phi ? *phi : PhiFunction::constant(0.0));
  const double m1 = mark_mean(c);
  const auto path = simulate(intensity, build_marks(c), c.horizon, derive_seed(c.seed, 0, 0));
  const auto grid = c.grid.points();
  const auto process = observed_on_grid(path, kernel, intensity, m1, c.theta_true, grid);

  std::ostringstream p;
  p << csv_preamble(c);
  write_csv(p, path);
  out.write("path.csv", p.str());
  std::ostringstream q;
  q << csv_preamble(c);
  write_csv(q, process);
  out.write("process.csv", q.str());

  Outcome o;
  o.result = {{"jumps", path.size()},
              {"integrated_intensity", integrated_intensity(intensity, c.horizon)},
              {"path_regularity", to_string(diagonal_class(kernel))},
              {"final_value", process.values.back()}};
  o.headline = "jumps=" + std::to_string(path.size()) + " X(T)=" + fmt(process.values.back());
  return o;
}

Outcome run_estimate(const ExperimentConfig& c, const PhiFunction& phi, unsigned workers,
                     Artifacts& out) {
  const auto truth = IntensitySpec::scaled_by_phi(c.intensity.base_rate, c.theta_true, phi);
  const auto model = IntensitySpec::constant(c.intensity.base_rate);
  const auto marks = build_marks(c);
  std::vector<double> estimate(c.replicas);
  std::vector<std::size_t> jumps(c.replicas);
  parallel_for(c.replicas, workers, [&](std::size_t r) {
    const auto path = simulate(truth, marks, c.horizon, derive_seed(c.seed, 0, r));
    jumps[r] = path.size();
    estimate[r] = mle_solve(path, phi, model, c.horizon);
  });

  std::ostringstream e;
  e << csv_preamble(c) << "replica,jumps,theta_hat\n";
  double mean = 0.0;
  double sq = 0.0;
  for (std::size_t r = 0; r < c.replicas; ++r) {
    csv::write_row(e, {static_cast<double>(r), static_cast<double>(jumps[r]), estimate[r]});
    mean += estimate[r];
    sq += (estimate[r] - c.theta_true) * (estimate[r] - c.theta_true);
  }
  mean /= static_cast<double>(c.replicas);
  out.write("estimates.csv", e.str());

  Outcome o;
  o.result = {{"theta_true", c.theta_true},
              {"phi_lambda_integral", phi_lambda_integral(phi, model, c.horizon)},
              {"mean_estimate", mean},
              {"rmse", std::sqrt(sq / static_cast<double>(c.replicas))},
              {"estimates", estimate}};
  o.headline = "theta_hat=" + fmt(mean) + " (true " + fmt(c.theta_true) + ", " +
               std::to_string(c.replicas) + " replicas)";
  return o;
}

Outcome run_trajectory(const ExperimentConfig& c, const PhiFunction& phi, Artifacts& out) {
  const auto truth = IntensitySpec::scaled_by_phi(c.intensity.base_rate, c.theta_true, phi);
  const auto model = IntensitySpec::constant(c.intensity.base_rate);
  const auto path = simulate(truth, build_marks(c), c.horizon, derive_seed(c.seed, 0, 0));
  const auto trace = trajectory(path, phi, model, c.grid.points());
  const std::size_t violations = monotonicity_violations(trace);

  std::ostringstream p;
  p << csv_preamble(c);
  write_csv(p, path);
  out.write("path.csv", p.str());
  std::ostringstream t;
  t << csv_preamble(c);
  write_csv(t, trace);
  out.write("trajectory.csv", t.str());

  Outcome o;
  o.passed = violations == 0;
  o.result = {{"jumps", path.size()},
              {"grid_points", trace.times.size()},
              {"jump_epochs", trace.jump_epochs.size()},
              {"monotonicity_violations", violations},
              {"final_estimate", trace.theta_hat.back()}};
  o.headline = "theta_hat(T)=" + fmt(trace.theta_hat.back()) +
               " violations=" + std::to_string(violations);
  return o;
}

Outcome run_girsanov(const ExperimentConfig& c, const PhiFunction& phi, unsigned workers) {
  LawComparisonConfig lc;
  lc.kernel = build_kernel(c);
  lc.intensity = IntensitySpec::constant(c.intensity.base_rate);
  lc.marks = build_marks(c);
  lc.h = ShiftFunction::scaled_phi(c.h_spec.scale, phi);
  lc.horizon = c.horizon;
  lc.eval_times = c.eval_times;
  lc.replicas = c.replicas;
  lc.seed = c.seed;
  lc.bootstrap = c.bootstrap;
  lc.workers = workers;
  const auto report = verify_equality_in_law(lc);

  Outcome o;
  o.passed = report.passed;
  o.result = to_json(report);
  std::size_t moments = 0;
  std::size_t ks = 0;
  for (const auto& t : report.times) {
    moments += static_cast<std::size_t>(t.first.pass) + static_cast<std::size_t>(t.second.pass);
    ks += static_cast<std::size_t>(t.ks_pass);
  }
  o.headline = "moments " + std::to_string(moments) + "/" +
               std::to_string(2 * report.times.size()) + " KS " + std::to_string(ks) + "/" +
               std::to_string(report.times.size()) +
               " E[density]=" + fmt(report.weight_mean);
  return o;
}

Outcome run_consistency(const ExperimentConfig& c, const PhiFunction& phi, unsigned workers,
                        Artifacts& out) {
  ConsistencyConfig cc;
  cc.phi = phi;
  cc.base_rate = c.intensity.base_rate;
  cc.theta = c.theta_true;
  cc.marks = build_marks(c);
  cc.horizons = c.horizons;
  cc.replicas = c.replicas;
  cc.seed = c.seed;
  cc.rmse_threshold = c.rmse_threshold;
  cc.workers = workers;
  const auto report = consistency_experiment(cc);

  std::ostringstream e;
  e << csv_preamble(c) << "replica,horizon,theta_hat\n";
  for (std::size_t r = 0; r < report.estimates.size(); ++r) {
    for (std::size_t k = 0; k < c.horizons.size(); ++k) {
      csv::write_row(e, {static_cast<double>(r), c.horizons[k], report.estimates[r][k]});
    }
  }
  out.write("estimates.csv", e.str());

  Outcome o;
  o.passed = report.passed;
  o.result = to_json(report);
  std::string rmse;
  for (const auto& h : report.horizons) rmse += (rmse.empty() ? "" : ",") + fmt(h.rmse);
  o.headline = "rmse=[" + rmse + "] threshold=" + fmt(c.rmse_threshold);
  return o;
}

Outcome run_solve_phi(const ExperimentConfig& c, const std::optional<PhiFunction>& phi,
                      Artifacts& out) {
  const auto kernel = build_kernel(c);
  const auto intensity = build_intensity(c, phi ? *phi : PhiFunction::constant(0.0));
  const double m1 = mark_mean(c);
  const auto grid = c.grid.points();
  const auto sol = solve_phi_volterra_detailed(kernel, intensity, m1, grid);

  std::ostringstream p;
  p << csv_preamble(c);
  write_csv(p, sol.phi);
  out.write("phi.csv", p.str());
  std::ostringstream r;
  r << csv_preamble(c) << "t,relative_residual\n";
  for (std::size_t k = 0; k < sol.check_nodes.size(); ++k) {
    csv::write_row(r, {sol.check_nodes[k], sol.relative_residuals[k]});
  }
  out.write("residuals.csv", r.str());

  Outcome o;
  o.result = {{"nodes", grid.size()}, {"max_relative_residual", sol.max_relative_residual}};
  o.headline = "nodes=" + std::to_string(grid.size()) +
               " max residual=" + fmt(sol.max_relative_residual);
  if (c.intensity.kind == "constant" && c.kernel.kind != "tabulated") {
    const auto exact = closed_form_phi(c);
    const auto& g = std::get<PhiFunction::Grid>(sol.phi.repr());
    double err = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double e = exact(g.nodes[i]);
      err = std::max(err, std::abs(g.values[i] - e) / std::abs(e));
    }
    o.result["closed_form_max_relative_error"] = err;
    o.headline += " error vs closed form=" + fmt(err);
  }
  return o;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  allow_keys(doc, "",
             {"experiment", "kernel", "intensity", "marks", "horizon", "grid", "phi_grid",
              "theta_true", "h_spec", "replicas", "seed", "output_path", "eval_times",
              "horizons", "rmse_threshold", "bootstrap"});
  ExperimentConfig c;
  c.experiment = text(doc, "", "experiment");
  if (std::find(std::begin(kExperiments), std::end(kExperiments), c.experiment) ==
      std::end(kExperiments)) {
    invalid("experiment", "unknown experiment '" + c.experiment +
                              "' (simulate, estimate, trajectory, verify-girsanov, "
                              "consistency, solve-phi)");
  }

  if (const auto it = doc.find("kernel"); it != doc.end()) {
    if (!it->is_object()) invalid("kernel", "expected a JSON object");
    c.kernel.kind = text(*it, "kernel", "kind");
    if (c.kernel.kind == "indicator") {
      allow_keys(*it, "kernel", {"kind"});
    } else if (c.kernel.kind == "exp_shot_noise") {
      allow_keys(*it, "kernel", {"kind", "a"});
      c.kernel.rate = number(*it, "kernel", "a");
    } else if (c.kernel.kind == "fractional") {
      allow_keys(*it, "kernel", {"kind", "H"});
      c.kernel.hurst = number(*it, "kernel", "H");
    } else if (c.kernel.kind == "tabulated") {
      allow_keys(*it, "kernel", {"kind", "path"});
      c.kernel.table = text(*it, "kernel", "path");
    } else {
      invalid("kernel.kind", "unknown kernel '" + c.kernel.kind +
                                 "' (indicator, exp_shot_noise, fractional, tabulated)");
    }
  }

  if (const auto it = doc.find("intensity"); it != doc.end()) {
    if (!it->is_object()) invalid("intensity", "expected a JSON object");
    c.intensity.kind = text(*it, "intensity", "kind", "constant");
    if (c.intensity.kind == "constant") {
      allow_keys(*it, "intensity", {"kind", "base_rate"});
    } else if (c.intensity.kind == "scaled_by_phi") {
      allow_keys(*it, "intensity", {"kind", "base_rate", "theta"});
      c.intensity.theta = number(*it, "intensity", "theta");
    } else {
      invalid("intensity.kind", "unknown intensity '" + c.intensity.kind +
                                    "' (constant, scaled_by_phi)");
    }
    c.intensity.base_rate = number(*it, "intensity", "base_rate", 1.0);
  }

  if (const auto it = doc.find("marks"); it != doc.end()) {
    if (!it->is_object()) invalid("marks", "expected a JSON object");
    c.marks.kind = text(*it, "marks", "kind");
    if (c.marks.kind == "unit") {
      allow_keys(*it, "marks", {"kind"});
    } else if (c.marks.kind == "exponential") {
      allow_keys(*it, "marks", {"kind", "mean"});
      c.marks.mean = number(*it, "marks", "mean");
    } else if (c.marks.kind == "lognormal") {
      allow_keys(*it, "marks", {"kind", "mu", "sigma"});
      c.marks.mu = number(*it, "marks", "mu");
      c.marks.sigma = number(*it, "marks", "sigma");
      c.marks.mean = std::exp(c.marks.mu + 0.5 * c.marks.sigma * c.marks.sigma);
    } else {
      invalid("marks.kind", "unknown marks '" + c.marks.kind + "' (unit, exponential, lognormal)");
    }
  }

  if (const auto it = doc.find("h_spec"); it != doc.end()) {
    allow_keys(*it, "h_spec", {"scale", "phi_source"});
    c.h_spec.scale = number(*it, "h_spec", "scale", 0.0);
    c.h_spec.phi_source = text(*it, "h_spec", "phi_source", "closed_form");
  }

  c.horizons = numbers(doc, "horizons");
  c.eval_times = numbers(doc, "eval_times");
  const bool has_horizons = c.experiment == "consistency" && !c.horizons.empty();
  c.horizon = number(doc, "", "horizon",
                     has_horizons ? std::optional<double>(c.horizons.back()) : std::nullopt);
  if (!(c.horizon > 0.0)) invalid("horizon", "must be positive");

  c.grid = doc.contains("grid") ? parse_grid(doc["grid"], "grid")
                                : GridSpec{c.horizon / 100.0, c.horizon, 100};
  c.phi_grid = doc.contains("phi_grid") ? parse_grid(doc["phi_grid"], "phi_grid")
                                        : GridSpec{c.horizon / 1000.0, c.horizon, 1000};
  c.theta_true = number(doc, "", "theta_true", 0.0);
  c.replicas = integer(doc, "", "replicas", 1);
  c.seed = integer(doc, "", "seed", 0);
  c.output_path = text(doc, "", "output_path", ".");
  c.rmse_threshold = number(doc, "", "rmse_threshold", 0.18);
  c.bootstrap = integer(doc, "", "bootstrap", 1000);
  if (c.eval_times.empty()) c.eval_times = {c.horizon};
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorKind::io, "cannot open config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::validation, "config is not valid JSON: " + std::string(e.what()));
  }
  auto c = parse_config(doc);
  c.base_dir = file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path();
  return c;
}

bool needs_phi(const ExperimentConfig& c) {
  return (!is(c, "simulate") && !is(c, "solve-phi")) || c.intensity.kind == "scaled_by_phi";
}

void validate(const ExperimentConfig& c) {
  const auto kernel = build_kernel(c);
  build_marks(c);
  if (!(c.intensity.base_rate > 0.0)) invalid("intensity.base_rate", "must be positive");
  if (!(c.intensity.theta >= 0.0)) invalid("intensity.theta", "must be >= 0");
  if (c.intensity.kind == "scaled_by_phi" && !is(c, "simulate") && !is(c, "solve-phi")) {
    invalid("intensity.kind",
            "scaled_by_phi is only used by simulate and solve-phi; " + c.experiment +
                " takes the rate under P as constant");
  }
  if (!(c.theta_true >= 0.0)) invalid("theta_true", "must be >= 0");
  if (c.replicas == 0) invalid("replicas", "must be a positive integer");
  check_grid(c.grid, "grid");
  if ((is(c, "simulate") || is(c, "trajectory")) && c.grid.stop > c.horizon) {
    invalid("grid.stop", "must not exceed the horizon");
  }

  if (needs_phi(c)) {
    const auto& source = c.h_spec.phi_source;
    if (source == "closed_form") {
      closed_form_phi(c);
    } else if (source == "volterra") {
      check_grid(c.phi_grid, "phi_grid");
      if (c.phi_grid.stop < c.horizon) invalid("phi_grid.stop", "must reach the horizon");
    } else {
      invalid("h_spec.phi_source", "unknown source '" + source + "' (closed_form, volterra)");
    }
  }

  if (is(c, "verify-girsanov")) {
    if (!kernel.diagonal_degenerate()) {
      fail(ErrorKind::precondition,
           "kernel " + kernel.name() +
               " is not degenerate on the diagonal (K(t,t) != 0); the change of measure needs "
               "K(t,t) = 0");
    }
    if (c.replicas < 2) invalid("replicas", "verify-girsanov needs at least 2 replicas");
    if (c.bootstrap == 0) invalid("bootstrap", "must be a positive integer");
    check_increasing(c.eval_times, c.horizon, "eval_times");
    if (c.h_spec.phi_source == "closed_form") {
      ShiftFunction::scaled_phi(c.h_spec.scale, closed_form_phi(c)).validate(c.horizon);
    }
  }

  if (is(c, "consistency")) {
    if (c.horizons.size() < 2) invalid("horizons", "consistency needs at least 2 horizons");
    check_increasing(c.horizons, c.horizon, "horizons");
    if (c.replicas < 2) invalid("replicas", "consistency needs at least 2 replicas");
    if (!(c.rmse_threshold > 0.0)) invalid("rmse_threshold", "must be positive");
  }

  if (is(c, "solve-phi") && c.kernel.kind == "tabulated") {
    const auto& t = std::get<TabulatedKernel>(kernel.repr());
    if (c.grid.stop > t.t_grid.back()) invalid("grid.stop", "beyond the tabulated kernel range");
  }
}

ojson to_json(const ExperimentConfig& c) {
  ojson kernel{{"kind", c.kernel.kind}};
  if (c.kernel.kind == "exp_shot_noise") kernel["a"] = c.kernel.rate;
  if (c.kernel.kind == "fractional") kernel["H"] = c.kernel.hurst;
  if (c.kernel.kind == "tabulated") kernel["path"] = c.kernel.table;

  ojson intensity{{"kind", c.intensity.kind}, {"base_rate", c.intensity.base_rate}};
  if (c.intensity.kind == "scaled_by_phi") intensity["theta"] = c.intensity.theta;

  ojson marks{{"kind", c.marks.kind}};
  if (c.marks.kind == "exponential") marks["mean"] = c.marks.mean;
  if (c.marks.kind == "lognormal") {
    marks["mu"] = c.marks.mu;
    marks["sigma"] = c.marks.sigma;
  }

  auto grid = [](const GridSpec& g) {
    return ojson{{"start", g.start}, {"stop", g.stop}, {"count", g.count}};
  };
  ojson doc;
  doc["experiment"] = c.experiment;
  doc["kernel"] = kernel;
  doc["intensity"] = intensity;
  doc["marks"] = marks;
  doc["horizon"] = c.horizon;
  doc["grid"] = grid(c.grid);
  doc["phi_grid"] = grid(c.phi_grid);
  doc["theta_true"] = c.theta_true;
  doc["h_spec"] = {{"scale", c.h_spec.scale}, {"phi_source", c.h_spec.phi_source}};
  doc["replicas"] = c.replicas;
  doc["seed"] = c.seed;
  doc["output_path"] = c.output_path;
  doc["eval_times"] = c.eval_times;
  doc["horizons"] = c.horizons;
  doc["rmse_threshold"] = c.rmse_threshold;
  doc["bootstrap"] = c.bootstrap;
  return doc;
}

KernelSpec build_kernel(const ExperimentConfig& c) {
  if (c.kernel.kind == "indicator") return KernelSpec::indicator();
  if (c.kernel.kind == "exp_shot_noise") return KernelSpec::exp_shot_noise(c.kernel.rate);
  if (c.kernel.kind == "fractional") return KernelSpec::fractional(c.kernel.hurst);
  const auto file = c.base_dir / c.kernel.table;
  std::ifstream in(file);
  if (!in) fail(ErrorKind::io, "cannot open kernel table " + file.string());
  return read_tabulated_kernel_csv(in);
}

MarkDistributionSpec build_marks(const ExperimentConfig& c) {
  if (c.marks.kind == "exponential") return MarkDistributionSpec::exponential(c.marks.mean);
  if (c.marks.kind == "lognormal") return MarkDistributionSpec::lognormal(c.marks.mu, c.marks.sigma);
  return MarkDistributionSpec::unit();
}

PhiFunction build_phi(const ExperimentConfig& c) {
  if (c.h_spec.phi_source == "closed_form") return closed_form_phi(c);
  const auto grid = c.phi_grid.points();
  return solve_phi_volterra(build_kernel(c), IntensitySpec::constant(c.intensity.base_rate),
                            mark_mean(c), grid);
}

IntensitySpec build_intensity(const ExperimentConfig& c, const PhiFunction& phi) {
  if (c.intensity.kind == "scaled_by_phi") {
    return IntensitySpec::scaled_by_phi(c.intensity.base_rate, c.intensity.theta, phi);
  }
  return IntensitySpec::constant(c.intensity.base_rate);
}

int exit_code_for(ErrorKind kind) noexcept {
  return is_numerical(kind) ? exit_numerical : exit_validation;
}

ojson error_record(std::string_view kind, const std::string& message, int exit_code) {
  return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", exit_code}}}};
}

RunOutcome run_experiment(const ExperimentConfig& c, const std::filesystem::path& out_dir,
                          unsigned workers) {
  validate(c);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory " + out_dir.string());

  std::optional<PhiFunction> phi;
  if (needs_phi(c)) phi = build_phi(c);

  Artifacts out{out_dir, {}};
  Outcome o;
  if (is(c, "simulate")) {
    o = run_simulate(c, phi, out);
  } else if (is(c, "estimate")) {
    o = run_estimate(c, *phi, workers, out);
  } else if (is(c, "trajectory")) {
    o = run_trajectory(c, *phi, out);
  } else if (is(c, "verify-girsanov")) {
    o = run_girsanov(c, *phi, workers);
  } else if (is(c, "consistency")) {
    o = run_consistency(c, *phi, workers, out);
  } else {
    o = run_solve_phi(c, phi, out);
  }
  out.write("report.json", report_text(c, o.passed, o.result));

  RunOutcome r;
  r.passed = o.passed;
  r.exit_code = o.passed ? exit_pass : exit_statistical;
  r.summary = c.experiment + ": " + (o.passed ? "pass" : "fail") + " " + o.headline;
  ojson manifest;
  manifest["experiment"] = c.experiment;
  manifest["seed"] = c.seed;
  manifest["passed"] = o.passed;
  manifest["exit_code"] = r.exit_code;
  manifest["config"] = to_json(c);
  manifest["artifacts"] = out.names;
  out.write("manifest.json", manifest.dump(2) + "\n");
  r.artifacts = out.names;
  return r;
}

}  // namespace fpp
