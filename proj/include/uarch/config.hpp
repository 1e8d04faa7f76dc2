// Run configuration for the command-line front end: one JSON document with
// machine parameters, sweep grids, benchmarks and the output directory.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uarch/dse.hpp"
#include "uarch/serialize.hpp"

namespace uarch {

struct RunConfig {
  MachineConfig machine;
  std::optional<std::string> delay_override;  // access-time CSV
  Grids grids;
  std::vector<KernelSpec> benchmarks;  // all six kernels at default size when absent
  double epsilon_pp = kDefaultEpsilonPp;
  double threshold_pp = kDefaultThresholdPp;
  std::string output_dir = "out";
};

// Every kernel with default parameters and the given seed.
std::vector<KernelSpec> default_benchmarks(std::uint64_t seed);

// Parses and validates. Benchmarks without a seed take default_seed.
// Relative override paths resolve against base_dir. Throws ConfigError.
RunConfig parse_run_config(const json& j, std::uint64_t default_seed = 1, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path, std::uint64_t default_seed = 1);

json config_json(const RunConfig& c);

CacheTimingModel make_timing_model(const RunConfig& c);

}  // namespace uarch
