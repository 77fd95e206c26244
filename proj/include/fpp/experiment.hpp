#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpp/error.hpp"
#include "fpp/kernels.hpp"
#include "fpp/phi_function.hpp"
#include "fpp/point_process.hpp"

namespace fpp {

/// `count` equally spaced points from start to stop inclusive.
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 0;

  std::vector<double> points() const;
};

/// One experiment, as read from a JSON config file. Every field has a
/// resolved value after parsing; to_json writes all of them back.
struct ExperimentConfig {
  std::string experiment;

  struct Kernel {
    std::string kind = "fractional";  // indicator | exp_shot_noise | fractional | tabulated
    double hurst = 0.7;
    double rate = 1.0;
    std::string table;  // CSV path for tabulated kernels
  } kernel;

  struct Intensity {
    std::string kind = "constant";  // constant | scaled_by_phi
    double base_rate = 1.0;
    double theta = 0.0;
  } intensity;

  struct Marks {
    std::string kind = "unit";  // unit | exponential | lognormal
    double mean = 1.0;
    double mu = 0.0;
    double sigma = 0.0;
  } marks;

  struct Shift {
    double scale = 0.0;
    std::string phi_source = "closed_form";  // closed_form | volterra
  } h_spec;

  double horizon = 1.0;
  GridSpec grid;
  GridSpec phi_grid;
  double theta_true = 0.0;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::string output_path = ".";
  std::vector<double> eval_times;
  std::vector<double> horizons;
  double rmse_threshold = 0.18;
  std::size_t bootstrap = 1000;

  /// Directory relative paths in the config are resolved against.
  std::filesystem::path base_dir = ".";
};

/// Reads and checks the structure of a config. Unknown keys, wrong types and
/// missing required fields throw ErrorKind::validation naming the key.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& file);

/// Cross-field checks (kernel parameters, grids inside the horizon, the
/// diagonal degeneracy needed by verify-girsanov, ...). Throws
/// ErrorKind::validation, ErrorKind::domain or ErrorKind::precondition.
void validate(const ExperimentConfig& config);

nlohmann::ordered_json to_json(const ExperimentConfig& config);

KernelSpec build_kernel(const ExperimentConfig& config);
MarkDistributionSpec build_marks(const ExperimentConfig& config);
/// The calibration function phi for the kernel under the constant base rate.
PhiFunction build_phi(const ExperimentConfig& config);
/// The configured rate; scaled_by_phi uses base_rate * (1 + theta * phi).
IntensitySpec build_intensity(const ExperimentConfig& config, const PhiFunction& phi);
/// True when the experiment needs the calibration function phi.
bool needs_phi(const ExperimentConfig& config);

enum ExitCode : int {
  exit_pass = 0,
  exit_validation = 1,
  exit_numerical = 2,
  exit_statistical = 3,
};

int exit_code_for(ErrorKind kind) noexcept;

/// {"error": {"kind", "message", "exit_code"}}.
nlohmann::ordered_json error_record(std::string_view kind, const std::string& message,
                                    int exit_code);

struct RunOutcome {
  int exit_code = exit_pass;
  bool passed = true;
  std::string summary;
  std::vector<std::string> artifacts;
};

/// Runs the experiment and writes its artifacts and manifest.json to
/// out_dir. Replicas run on up to `workers` threads; the artifacts do not
/// depend on the worker count.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                          unsigned workers);

}  // namespace fpp
