// coeffid command line: run noise-level sweeps, verify the numerics, list benchmarks.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "coeffid/config.hpp"
#include "coeffid/problems.hpp"
#include "coeffid/report.hpp"
#include "coeffid/verification.hpp"

namespace {

enum Exit : int { kOk = 0, kRowFailure = 1, kConfigError = 2, kIoError = 3 };

constexpr const char* kJobsEnv = "COEFFID_JOBS";

// --jobs beats the environment, which beats the config file.
unsigned resolve_jobs(unsigned from_config, int from_flag) {
  if (from_flag > 0) return static_cast<unsigned>(from_flag);
  if (const char* env = std::getenv(kJobsEnv); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0 || v > 4096) {
      throw coeffid::ConfigError(kJobsEnv, "must be an integer in 0..4096");
    }
    if (v > 0) return static_cast<unsigned>(v);
  }
  return from_config;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int jobs_flag) {
  coeffid::SweepConfig config;
  try {
    config = coeffid::parse_config_file(config_path);
    config.jobs = resolve_jobs(config.jobs, jobs_flag);
  } catch (const coeffid::ConfigError& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return kConfigError;
  }

  // fail before a long sweep rather than after it
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "i/o error: cannot create " << out_dir << ": " << ec.message() << "\n";
    return kIoError;
  }

  const auto result = coeffid::run_sweep(config);
  try {
    coeffid::write_run_outputs(out_dir, config, result);
  } catch (const coeffid::IoError& ex) {
    std::cerr << "i/o error: " << ex.what() << "\n";
    return kIoError;
  }

  std::cout << coeffid::rows_csv(result) << coeffid::rates_csv(result);
  for (const auto& row : result.rows) {
    if (row.failed) std::cerr << "row eps=" << row.plan.epsilon << " failed: " << row.failure << "\n";
  }
  return result.any_failed() ? kRowFailure : kOk;
}

int cmd_verify(bool flip_sign) {
  const auto checks = coeffid::run_verification(flip_sign);
  bool all = true;
  for (const auto& c : checks) {
    std::printf("%-30s %s  %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL", c.detail.c_str());
    all = all && c.passed;
  }
  return all ? kOk : kRowFailure;
}

int cmd_list_examples() {
  for (const auto& id : coeffid::builtin_problem_ids()) {
    std::printf("%-6s %s\n", id.c_str(), coeffid::builtin_problem(id).summary.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion coefficient identification from noisy data"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "Run the noise-level sweep of a config file");
  run->add_option("config", config_path, "JSON config (or a manifest.json of an earlier run)")
      ->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--jobs", jobs, "Worker threads (default: " + std::string(kJobsEnv) +
                                      ", then the config, then all cores)")
      ->check(CLI::Range(1, 4096));

  bool flip_sign = false;
  auto* verify = app.add_subcommand("verify", "Run the built-in verification suite");
  verify->add_flag("--flip-gradient-sign", flip_sign, "Negate gradients (negative control)")
      ->group("");

  auto* list = app.add_subcommand("list-examples", "List the builtin benchmark problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, jobs);
    if (*verify) return cmd_verify(flip_sign);
    if (*list) return cmd_list_examples();
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kRowFailure;
  }
  return kOk;
}
