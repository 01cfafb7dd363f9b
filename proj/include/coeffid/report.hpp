#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "coeffid/experiment.hpp"

namespace coeffid {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Failure to create or write an output file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Locale-independent scientific notation with 10 significant digits.
std::string format_number(double v);

/// epsilon,gamma,n_space,n_time,tau,e_q,e_u,weighted_error,max_weight,iterations,termination,status
/// Wall-clock time is kept out so that reruns are byte-identical.
std::string rows_csv(const SweepResult& result);
/// metric,rate for e_q and e_u ("nan" with fewer than two successful rows).
std::string rates_csv(const SweepResult& result);
std::string timings_csv(const SweepResult& result);
std::string optimizer_csv(const SweepResult& result);
std::string positivity_csv(const SweepResult& result);
/// Resolved configuration, tool version, seed, per-row parameters and metrics, and rates.
std::string manifest_json(const SweepConfig& config, const SweepResult& result);

/// Writes rows.csv, rates.csv, manifest.json and diagnostics/{timings,optimizer,positivity}.csv
/// into `dir`, creating it if needed. Throws IoError.
void write_run_outputs(const std::filesystem::path& dir, const SweepConfig& config,
                       const SweepResult& result);

}  // namespace coeffid
