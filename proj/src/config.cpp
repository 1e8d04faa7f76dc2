#include "uarch/config.hpp"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>

namespace uarch {

namespace fs = std::filesystem;

std::vector<KernelSpec> default_benchmarks(std::uint64_t seed) {
  std::vector<KernelSpec> out;
  for (const auto& k : list_kernels()) out.push_back({k.name, {}, seed});
  return out;
}

RunConfig parse_run_config(const json& j, std::uint64_t default_seed, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  static const char* const kTop[] = {"core", "cache", "grids", "benchmarks", "extraction", "output_dir"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(kTop), std::end(kTop), it.key()) == std::end(kTop)) {
      throw ConfigError(fmt::format("config: unknown key '{}'", it.key()));
    }
  }

  RunConfig c;
  try {
    if (j.contains("core")) from_json(j["core"], c.machine.core);
    if (j.contains("cache")) {
      json cache = j["cache"];
      if (cache.is_object() && cache.contains("delay_override")) {
        const json& p = cache["delay_override"];
        if (!p.is_null()) {
          if (!p.is_string()) throw ConfigError("cache.delay_override: expected a path or null");
          fs::path path = p.get<std::string>();
          if (path.is_relative()) path = fs::path(base_dir) / path;
          c.delay_override = path.lexically_normal().string();
        }
        cache.erase("delay_override");
      }
      from_json(cache, c.machine.cache);
    }
    if (j.contains("grids")) from_json(j["grids"], c.grids);
    if (j.contains("benchmarks")) {
      const json& b = j["benchmarks"];
      if (!b.is_array()) throw ConfigError("benchmarks: expected an array");
      for (const auto& e : b) {
        KernelSpec k;
        k.seed = default_seed;
        from_json(e, k);
        c.benchmarks.push_back(std::move(k));
      }
    } else {
      c.benchmarks = default_benchmarks(default_seed);
    }
    if (j.contains("extraction")) {
      const json& x = j["extraction"];
      if (!x.is_object()) throw ConfigError("extraction: expected an object");
      for (auto it = x.begin(); it != x.end(); ++it) {
        if (!it->is_number()) throw ConfigError(fmt::format("extraction.{}: expected a number", it.key()));
        if (it.key() == "epsilon_pp") {
          c.epsilon_pp = it->get<double>();
        } else if (it.key() == "threshold_pp") {
          c.threshold_pp = it->get<double>();
        } else {
          throw ConfigError(fmt::format("extraction: unknown key '{}'", it.key()));
        }
      }
    }
    if (j.contains("output_dir")) {
      if (!j["output_dir"].is_string()) throw ConfigError("output_dir: expected a string");
      c.output_dir = j["output_dir"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }

  check_core(c.machine.core);
  try {
    build_hierarchy(c.machine, CacheTimingModel{});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  check_grids(c.grids);
  if (c.benchmarks.empty()) throw ConfigError("benchmarks: at least one is required");
  for (auto& k : c.benchmarks) {
    try {
      k = resolve_kernel_spec(k);
    } catch (const KernelError& e) {
      throw ConfigError(e.what());
    }
  }
  if (!(c.epsilon_pp >= 0) || !(c.threshold_pp >= 0)) {
    throw ConfigError("extraction thresholds must be non-negative");
  }
  if (c.delay_override && !fs::exists(*c.delay_override)) {
    throw ConfigError(fmt::format("cache.delay_override: no such file '{}'", *c.delay_override));
  }
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  return c;
}

RunConfig load_run_config(const std::string& path, std::uint64_t default_seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  const fs::path base = fs::path(path).parent_path();
  return parse_run_config(j, default_seed, base.empty() ? "." : base.string());
}

json config_json(const RunConfig& c) {
  json cache = c.machine.cache;
  cache["delay_override"] = c.delay_override ? json(*c.delay_override) : json(nullptr);
  return {{"core", c.machine.core},
          {"cache", cache},
          {"grids", c.grids},
          {"benchmarks", c.benchmarks},
          {"extraction", {{"epsilon_pp", c.epsilon_pp}, {"threshold_pp", c.threshold_pp}}},
          {"output_dir", c.output_dir}};
}

CacheTimingModel make_timing_model(const RunConfig& c) {
  if (!c.delay_override) return {};
  try {
    return CacheTimingModel(DelayConstants{}, DelayOverrides::load_csv(*c.delay_override));
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("cache.delay_override: {}", e.what()));
  }
}

}  // namespace uarch
