// fpp-lab: runs one experiment described by a JSON config file.
//
//   fpp-lab run <config.json> [--seed N] [--out DIR]
//   fpp-lab validate <config.json>
//
// Exit codes: 0 pass, 1 validation error, 2 numerical failure,
// 3 statistical-test failure. Errors are reported on stderr as one-line JSON.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fpp/error.hpp"
#include "fpp/experiment.hpp"
#include "fpp/parallel.hpp"

namespace {

int report_error(std::string_view kind, const std::string& message, int code) {
  std::cerr << fpp::error_record(kind, message, code).dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on filtered Poisson processes", "fpp-lab"};
  app.require_subcommand(1);

  std::string config_file;
  std::uint64_t seed = 0;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run the experiment and write its artifacts");
  run->add_option("config", config_file, "JSON config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory (default: config output_path)");

  auto* check = app.add_subcommand("validate", "Check a config without running it");
  check->add_option("config", config_file, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), fpp::exit_validation);
  }

  try {
    auto config = fpp::load_config(config_file);
    if (*check) {
      fpp::validate(config);
      nlohmann::ordered_json doc{{"valid", true}, {"config", fpp::to_json(config)}};
      std::cout << doc.dump() << '\n';
      return fpp::exit_pass;
    }
    if (*seed_opt) config.seed = seed;
    if (!out_dir.empty()) config.output_path = out_dir;
    const auto outcome = fpp::run_experiment(config, config.output_path, fpp::worker_count());
    std::cout << outcome.summary << '\n';
    return outcome.exit_code;
  } catch (const fpp::Error& e) {
    return report_error(fpp::to_string(e.kind()), e.what(), fpp::exit_code_for(e.kind()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), fpp::exit_numerical);
  }
}
