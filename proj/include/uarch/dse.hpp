// Design-space exploration: parameter sweeps, penalty curves and the
// staged cache -> register file -> window-structure search.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uarch/camodel.hpp"
#include "uarch/cachesim.hpp"
#include "uarch/core.hpp"
#include "uarch/kernels.hpp"

namespace uarch {

enum class Axis { l1_kb, l2_kb, phys_regs, rob, iq, lsq };

std::string axis_name(Axis a);
Axis parse_axis(const std::string& s);  // throws ConfigError

struct CacheParams {
  std::uint32_t l1_kb = 64;
  std::uint32_t l2_kb = 128;
  std::uint32_t l1_line_bytes = 32;
  std::uint32_t l2_line_bytes = 64;
  std::uint32_t l1_assoc = 4;
  std::uint32_t l2_assoc = 8;
  std::uint32_t banks = 1;
  std::uint32_t rw_ports = 1;
  std::uint32_t tech_nm = 90;
  double temperature_k = 350.0;
  // Fixed hit latencies, used only when the delay model is off.
  std::uint32_t l1_hit_cycles = 2;
  std::uint32_t l2_hit_cycles = 2;
  std::uint32_t mem_cycles = 100;
  bool use_delay_model = true;

  friend bool operator==(const CacheParams&, const CacheParams&) = default;
};

struct MachineConfig {
  CoreConfig core;
  CacheParams cache;

  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

CacheGeometry l1_geometry(const CacheParams& c);
CacheGeometry l2_geometry(const CacheParams& c);
HierarchyConfig build_hierarchy(const MachineConfig& m, const CacheTimingModel& model);
// L1I + L1D + L2 array area.
double cache_area_mm2(const CacheParams& c, const CacheTimingModel& model);

std::uint32_t axis_value(const MachineConfig& m, Axis a);
MachineConfig with_axis(MachineConfig m, Axis a, std::uint32_t v);

// Signed percent; negative when cfg is slower than ref.
double per_pen(std::uint64_t cycles_cfg, std::uint64_t cycles_ref);

class DseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Benchmark {
  KernelSpec spec;
  Trace trace;
};

std::vector<Benchmark> make_benchmarks(const std::vector<KernelSpec>& specs);

// Runs (config, benchmark) simulations on a fixed pool of worker threads.
// Results are memoized per configuration and never depend on the job count.
class Runner {
 public:
  Runner(std::vector<Benchmark> benchmarks, CacheTimingModel model, unsigned jobs = 1);

  // out[c][b] = result of configs[c] on benchmark b.
  std::vector<std::vector<SimResult>> run(const std::vector<MachineConfig>& configs);

  const std::vector<Benchmark>& benchmarks() const { return benchmarks_; }
  const CacheTimingModel& model() const { return model_; }
  unsigned jobs() const { return jobs_; }
  std::size_t simulations() const { return simulations_; }

 private:
  std::vector<Benchmark> benchmarks_;
  CacheTimingModel model_;
  unsigned jobs_;
  std::size_t simulations_ = 0;
  std::map<std::string, std::vector<SimResult>> memo_;
};

struct SweepPoint {
  std::uint32_t value = 0;
  std::optional<std::uint32_t> l2_kb;  // set on the joint L1 x L2 sweep
  std::vector<std::uint64_t> roi_cycles;  // per benchmark
  std::vector<double> ipc_roi;
  std::vector<double> per_pen;
  double avg_per_pen = 0.0;
  double area_mm2 = 0.0;  // cache arrays; 0 when not computed
  double perf_per_area = 0.0;  // relative performance per mm2 of cache

  std::string label() const;
};

struct SweepResult {
  std::string axis;  // axis name, or "l1_l2" for the joint cache sweep
  std::vector<std::string> benchmarks;
  std::vector<std::uint64_t> baseline_cycles;
  std::vector<SweepPoint> points;
};

struct SweepSpec {
  Axis axis = Axis::rob;
  std::vector<std::uint32_t> values;
  MachineConfig baseline;
};

SweepResult run_sweep(const SweepSpec& spec, Runner& runner);

// L1 x L2 cross product; pairs with l2 < l1 are skipped.
SweepResult run_cache_sweep(const std::vector<std::uint32_t>& l1_kb,
                            const std::vector<std::uint32_t>& l2_kb,
                            const MachineConfig& baseline, Runner& runner);

inline constexpr double kDefaultEpsilonPp = 0.05;
inline constexpr double kDefaultThresholdPp = 2.0;

// Index of the first point within epsilon of the curve maximum.
std::size_t find_best(const std::vector<double>& avg, double epsilon_pp = kDefaultEpsilonPp);
// Index of the first point within threshold of the best point.
std::optional<std::size_t> find_optimum(const std::vector<double>& avg,
                                        double threshold_pp = kDefaultThresholdPp,
                                        double epsilon_pp = kDefaultEpsilonPp);

using Curve = std::vector<std::pair<std::uint32_t, double>>;  // (size, avg_per_pen), increasing size
std::uint32_t find_best(const Curve& c, double epsilon_pp = kDefaultEpsilonPp);
std::optional<std::uint32_t> find_optimum(const Curve& c, double threshold_pp = kDefaultThresholdPp,
                                          double epsilon_pp = kDefaultEpsilonPp);

struct ExtractionResult {
  std::string axis;
  std::string best;  // point label
  std::optional<std::string> optimum;
  std::size_t best_index = 0;
  std::optional<std::size_t> optimum_index;
  double threshold_pp = kDefaultThresholdPp;
  double epsilon_pp = kDefaultEpsilonPp;
  // Growing past the best point buys nothing.
  bool saturation_detected = false;
  // Some point past the best is measurably slower than the maximum.
  bool degradation_detected = false;
};

ExtractionResult extract(const SweepResult& r, double threshold_pp = kDefaultThresholdPp,
                         double epsilon_pp = kDefaultEpsilonPp);

struct Grids {
  std::vector<std::uint32_t> l1_kb{16, 32, 64, 128, 256, 512};
  std::vector<std::uint32_t> l2_kb{128, 256, 512, 1024};
  std::vector<std::uint32_t> phys_regs{40, 48, 56, 64, 72, 80, 96};
  std::vector<std::uint32_t> rob{8, 16, 32, 64, 128};
  std::vector<std::uint32_t> iq{4, 8, 12, 16, 20, 32};
  std::vector<std::uint32_t> lsq{4, 8, 12, 16, 32};

  const std::vector<std::uint32_t>& of(Axis a) const;
  friend bool operator==(const Grids&, const Grids&) = default;
};

// Throws ConfigError when a grid is empty or not strictly increasing.
void check_grids(const Grids& g);

struct ExploreSpec {
  MachineConfig baseline;
  Grids grids;
  double threshold_pp = kDefaultThresholdPp;
  double epsilon_pp = kDefaultEpsilonPp;
};

struct StageReport {
  std::string stage;
  MachineConfig reference;
  SweepResult sweep;
  ExtractionResult extraction;
};

struct ExploreReport {
  StageReport cache;
  StageReport phys_regs;
  std::vector<StageReport> window;  // rob, iq, lsq
  MachineConfig final_config;  // BCS, register-file optimum, window optima
  double best_cache_area_mm2 = 0.0;
  double optimum_cache_area_mm2 = 0.0;
};

// Stage failures surface as DseError naming the stage.
ExploreReport staged_explore(const ExploreSpec& spec, Runner& runner);

}  // namespace uarch
