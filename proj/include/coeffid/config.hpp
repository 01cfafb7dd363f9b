#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "coeffid/experiment.hpp"

namespace coeffid {

/// Invalid or missing configuration entry. `path()` is the JSON key path, e.g. "optimizer.max_iters".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parses a sweep configuration document.
///
/// The document is a JSON object. "example" selects a builtin problem, and every other key
/// overrides one of its defaults:
///
///   {
///     "example": "ell1d",
///     "seed": 12345,
///     "epsilons": [5e-2, 1e-2, 5e-3],
///     "anchors": {"eps0": 5e-2, "gamma0": 5e-8, "h0": 2.5e-2, "tau0": 2.5e-3},
///     "fine": {"cells": 3200, "steps": 800},
///     "time": {"final": 0.1, "sigma": 0.0},
///     "initial_guess": 2.0,
///     "box": {"c0": 0.5, "c1": 5.0},
///     "optimizer": {"max_iters": 100, "metric": "gauss_newton", ...},
///     "betas": [0, 2],
///     "jobs": 4
///   }
///
/// Unknown keys are rejected. A run manifest is accepted too: its "config" member is used.
SweepConfig parse_config_text(std::string_view text);
SweepConfig parse_config_file(const std::filesystem::path& path);

/// Fully resolved configuration as a JSON document that parse_config_text reads back
/// to an equal configuration.
std::string config_to_json(const SweepConfig& config, int indent = 2);

}  // namespace coeffid
