// uarch-dse: trace generation, simulation and design-space exploration.
//
// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.
// Primary results go to stdout as JSON; diagnostics go to stderr.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "uarch/config.hpp"
#include "uarch/core.hpp"
#include "uarch/dse.hpp"
#include "uarch/kernels.hpp"
#include "uarch/report.hpp"
#include "uarch/serialize.hpp"
#include "uarch/trace.hpp"

namespace {

using namespace uarch;

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

// Input problems the user can fix: exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("UARCH_DSE_SEED");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used, 0);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(fmt::format("UARCH_DSE_SEED='{}' is not an unsigned integer", env));
  }
}

std::string dashed(std::string s) {
  for (auto& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::uint32_t> parse_values(const std::string& s) {
  std::vector<std::uint32_t> out;
  for (const auto& tok : split_values(s)) {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(tok, &used);
      if (used != tok.size() || v > 0xffffffffu) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad value '{}' in --values", tok));
    }
  }
  return out;
}

Trace load_trace(const std::string& path) {
  if (!std::filesystem::exists(path)) throw UsageError(fmt::format("no such trace file '{}'", path));
  try {
    return read_trace_file(path);
  } catch (const TraceParseError& e) {
    throw UsageError(fmt::format("{}: {}", path, e.what()));
  }
}

struct GenArgs {
  std::string kernel;
  std::map<std::string, std::int64_t> params;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool list = false;
};

int cmd_gen(const GenArgs& a) {
  if (a.list) {
    json arr = json::array();
    for (const auto& k : list_kernels()) {
      json params = json::array();
      for (const auto& p : k.params) {
        params.push_back({{"name", p.name}, {"default", p.default_value}, {"min", p.min_value},
                          {"max", p.max_value}, {"description", p.description}});
      }
      arr.push_back({{"name", k.name}, {"summary", k.summary}, {"params", params}});
    }
    print_json(arr);
    return kOk;
  }
  if (a.kernel.empty()) throw UsageError("gen needs a kernel name (see gen --list)");
  if (a.out.empty()) throw UsageError("gen needs -o <path>");
  KernelSpec spec{a.kernel, a.params, a.seed.value_or(default_seed())};
  try {
    spec = resolve_kernel_spec(spec);
  } catch (const KernelError& e) {
    throw UsageError(e.what());
  }
  const Trace t = gen_kernel(spec);
  write_trace_file(t, a.out);
  print_json({{"kernel", spec.kernel},
              {"params", spec.params},
              {"seed", spec.seed},
              {"records", t.records.size()},
              {"roi_records", t.roi_size()},
              {"path", a.out}});
  return kOk;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) throw UsageError("--config is required");
  return load_run_config(path, default_seed());
}

int cmd_sim(const std::string& config_path, const std::string& trace_path) {
  const RunConfig cfg = load_config(config_path);
  const CacheTimingModel model = make_timing_model(cfg);
  const HierarchyConfig hier = build_hierarchy(cfg.machine, model);
  const Trace trace = load_trace(trace_path);
  if (auto v = validate_trace(trace); !v.empty()) {
    throw UsageError(fmt::format("{}: record {}: {}", trace_path, v.front().index, v.front().message));
  }
  print_json(json(simulate(trace, cfg.machine.core, hier)));
  return kOk;
}

std::filesystem::path out_dir(const RunConfig& cfg, const std::string& override_dir) {
  return override_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(override_dir);
}

int cmd_sweep(const std::string& config_path, const std::string& axis_s, const std::string& values_s,
              unsigned jobs, const std::string& dir) {
  const RunConfig cfg = load_config(config_path);
  Axis axis;
  try {
    axis = parse_axis(axis_s);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  SweepSpec spec{axis, values_s.empty() ? cfg.grids.of(axis) : parse_values(values_s), cfg.machine};
  const auto start = std::chrono::steady_clock::now();
  Runner runner(make_benchmarks(cfg.benchmarks), make_timing_model(cfg), jobs);
  const SweepResult r = run_sweep(spec, runner);
  const ExtractionResult e = extract(r, cfg.threshold_pp, cfg.epsilon_pp);
  const auto files = write_sweep_outputs(r, out_dir(cfg, dir));
  print_json({{"sweep", r}, {"extraction", e}, {"files", files}});
  fmt::print(stderr, "{} simulations in {:.1f} s\n", runner.simulations(),
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return kOk;
}

int cmd_explore(const std::string& config_path, unsigned jobs, const std::string& dir) {
  const RunConfig cfg = load_config(config_path);
  const auto start = std::chrono::steady_clock::now();
  Runner runner(make_benchmarks(cfg.benchmarks), make_timing_model(cfg), jobs);
  ExploreSpec spec{cfg.machine, cfg.grids, cfg.threshold_pp, cfg.epsilon_pp};
  const ExploreReport rep = staged_explore(spec, runner);
  const auto files = write_explore_outputs(rep, out_dir(cfg, dir));
  json stages = json::array();
  stages.push_back(rep.cache.extraction);
  stages.push_back(rep.phys_regs.extraction);
  for (const auto& s : rep.window) stages.push_back(s.extraction);
  print_json({{"extractions", stages},
              {"final_config", rep.final_config},
              {"best_cache_area_mm2", rep.best_cache_area_mm2},
              {"optimum_cache_area_mm2", rep.optimum_cache_area_mm2},
              {"files", files}});
  fmt::print(stderr, "{} simulations in {:.1f} s\n", runner.simulations(),
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return kOk;
}

int cmd_report(const std::string& input, const std::string& dir) {
  std::ifstream in(input);
  if (!in) throw UsageError(fmt::format("cannot open '{}'", input));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("{}: {}", input, e.what()));
  }
  const std::filesystem::path target =
      dir.empty() ? std::filesystem::path(input).parent_path() / "report" : std::filesystem::path(dir);
  std::vector<std::string> files;
  try {
    if (j.is_object() && j.contains("axis")) {
      files = write_sweep_outputs(j.get<SweepResult>(), target);
    } else {
      files = write_explore_outputs(j.get<ExploreReport>(), target);
    }
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("{}: {}", input, e.what()));
  } catch (const ConfigError& e) {
    throw UsageError(fmt::format("{}: {}", input, e.what()));
  }
  print_json({{"files", files}, {"dir", target.string()}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven out-of-order core simulator and design-space explorer"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a kernel trace");
  g->add_option("kernel", gen.kernel, "kernel name");
  g->add_option("-o,--out", gen.out, "output trace path");
  g->add_option("--seed", gen.seed, "RNG seed (default: UARCH_DSE_SEED or 1)");
  g->add_flag("--list", gen.list, "list kernels and their parameters");
  std::map<std::string, std::int64_t> raw_params;
  for (const auto& k : list_kernels()) {
    for (const auto& p : k.params) {
      if (raw_params.count(p.name)) continue;
      raw_params[p.name] = 0;
      g->add_option("--" + dashed(p.name), raw_params[p.name], fmt::format("{} ({})", p.description, k.name));
    }
  }

  std::string config, trace, axis, values, dir, input;
  unsigned jobs = 0;
  auto* s = app.add_subcommand("sim", "simulate one trace");
  s->add_option("-c,--config", config, "run configuration (JSON)");
  s->add_option("-t,--trace", trace, "trace file")->required();

  auto* sw = app.add_subcommand("sweep", "sweep one axis");
  sw->add_option("-c,--config", config, "run configuration (JSON)");
  sw->add_option("-a,--axis", axis, "l1_kb, l2_kb, phys_regs, rob, iq or lsq")->required();
  sw->add_option("--values", values, "comma-separated sizes (default: the config grid)");
  sw->add_option("-j,--jobs", jobs, "worker threads (0 = all cores)");
  sw->add_option("-o,--out-dir", dir, "output directory (default: config output_dir)");

  auto* ex = app.add_subcommand("explore", "staged cache, register file and window exploration");
  ex->add_option("-c,--config", config, "run configuration (JSON)");
  ex->add_option("-j,--jobs", jobs, "worker threads (0 = all cores)");
  ex->add_option("-o,--out-dir", dir, "output directory (default: config output_dir)");

  auto* rp = app.add_subcommand("report", "re-emit CSV and .dat files from a JSON report");
  rp->add_option("-i,--input", input, "explore.json or sweep_<axis>.json")->required();
  rp->add_option("-o,--out-dir", dir, "output directory (default: <input dir>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (g->parsed()) {
      for (const auto& [name, value] : raw_params) {
        if (g->count("--" + dashed(name)) > 0) gen.params[name] = value;
      }
      return cmd_gen(gen);
    }
    if (s->parsed()) return cmd_sim(config, trace);
    if (sw->parsed()) return cmd_sweep(config, axis, values, jobs, dir);
    if (ex->parsed()) return cmd_explore(config, jobs, dir);
    if (rp->parsed()) return cmd_report(input, dir);
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kUsage;
  } catch (const DseError& e) {
    fmt::print(stderr, "explore failed: {}\n", e.what());
    return kRuntime;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
