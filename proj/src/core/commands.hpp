#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/model.hpp"

namespace spinbus {

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  std::vector<OutputFile> files;
  std::vector<std::string> warnings;
  nlohmann::ordered_json resolved_config;
};

/// Command names: spectrum, effective, ensemble, scaling, validate.
const std::vector<std::string>& command_names();

/// Runs one command on a JSON config. Unknown keys are rejected. The result
/// holds every output file in memory; writing them is left to the caller.
CommandResult run_command(const std::string& command, const nlohmann::json& config, unsigned threads = 1);

/// Builds the system described by the shared config keys: either
/// {"spec": {...}} or n_sites, boundary, couplings, fields, b0.
SpinSystemSpec system_from_config(const nlohmann::json& config, nlohmann::ordered_json& resolved);

struct Crossing {
  std::size_t lower;  // the pair is (lower, lower + 1)
  double b0;
  double gap;
};

/// Locates b0 values in [b_min, b_max] where levels (lower, lower + 1) of the
/// system under a uniform field come within `tol`: grid minima of the gap
/// are refined by golden-section search.
std::vector<Crossing> find_crossings(const SpinSystemSpec& spec, std::size_t lower, double b_min, double b_max,
                                     int steps, double tol);

}  // namespace spinbus
