#include "uarch/dse.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "uarch/serialize.hpp"

namespace uarch {

namespace {

constexpr std::pair<Axis, const char*> kAxisNames[] = {
    {Axis::l1_kb, "l1_kb"}, {Axis::l2_kb, "l2_kb"}, {Axis::phys_regs, "phys_regs"},
    {Axis::rob, "rob"},     {Axis::iq, "iq"},       {Axis::lsq, "lsq"},
};

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_curve(const Curve& c) {
  if (c.empty()) throw std::invalid_argument("empty curve");
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i].first <= c[i - 1].first) throw std::invalid_argument("curve sizes must be strictly increasing");
  }
}

std::vector<double> avgs(const Curve& c) {
  std::vector<double> out;
  for (const auto& [size, avg] : c) out.push_back(avg);
  return out;
}

// Fills per_pen and the average from roi_cycles.
void score(SweepResult& r) {
  for (auto& p : r.points) {
    p.per_pen.clear();
    for (std::size_t b = 0; b < r.benchmarks.size(); ++b) {
      p.per_pen.push_back(per_pen(p.roi_cycles[b], r.baseline_cycles[b]));
    }
    p.avg_per_pen = mean(p.per_pen);
  }
}

SweepPoint measure(const std::vector<SimResult>& results) {
  SweepPoint p;
  for (const auto& s : results) {
    p.roi_cycles.push_back(s.roi_cycles);
    p.ipc_roi.push_back(s.ipc_roi);
  }
  return p;
}

void add_area(SweepPoint& p, const CacheParams& c, const CacheTimingModel& model) {
  p.area_mm2 = cache_area_mm2(c, model);
  p.perf_per_area = (1.0 + p.avg_per_pen / 100.0) / p.area_mm2;
}

std::vector<std::string> benchmark_names(const Runner& runner) {
  std::vector<std::string> out;
  for (const auto& b : runner.benchmarks()) {
    std::string name = b.spec.kernel;
    const auto dup = std::count_if(out.begin(), out.end(), [&](const std::string& n) {
      return n == name || n.rfind(name + "_", 0) == 0;
    });
    if (dup > 0) name += fmt::format("_{}", dup + 1);
    out.push_back(name);
  }
  return out;
}

}  // namespace

std::string axis_name(Axis a) {
  for (const auto& [axis, name] : kAxisNames) {
    if (axis == a) return name;
  }
  throw std::logic_error("bad axis");
}

Axis parse_axis(const std::string& s) {
  for (const auto& [axis, name] : kAxisNames) {
    if (s == name) return axis;
  }
  throw ConfigError(fmt::format("unknown axis '{}'", s));
}

CacheGeometry l1_geometry(const CacheParams& c) {
  CacheGeometry g;
  g.capacity_bytes = std::uint64_t{c.l1_kb} * 1024;
  g.line_bytes = c.l1_line_bytes;
  g.associativity = c.l1_assoc;
  g.banks = c.banks;
  g.rw_ports = c.rw_ports;
  g.tech_nm = c.tech_nm;
  g.access_type = AccessType::fast;
  g.temperature_k = c.temperature_k;
  return g;
}

CacheGeometry l2_geometry(const CacheParams& c) {
  CacheGeometry g = l1_geometry(c);
  g.capacity_bytes = std::uint64_t{c.l2_kb} * 1024;
  g.line_bytes = c.l2_line_bytes;
  g.associativity = c.l2_assoc;
  g.access_type = AccessType::normal_serial;
  return g;
}

HierarchyConfig build_hierarchy(const MachineConfig& m, const CacheTimingModel& model) {
  const CacheParams& c = m.cache;
  HierarchyConfig h;
  h.l1i.geometry = l1_geometry(c);
  h.l1d.geometry = h.l1i.geometry;
  h.l2.geometry = l2_geometry(c);
  h.mem_cycles = c.mem_cycles;
  check_geometry(h.l1d.geometry);
  check_geometry(h.l2.geometry);
  if (c.use_delay_model) {
    h.l1i.hit_cycles = model.timing(h.l1d.geometry, m.core.clock_ghz).access_cycles;
    h.l2.hit_cycles = model.timing(h.l2.geometry, m.core.clock_ghz).access_cycles;
  } else {
    h.l1i.hit_cycles = c.l1_hit_cycles;
    h.l2.hit_cycles = c.l2_hit_cycles;
  }
  h.l1d.hit_cycles = h.l1i.hit_cycles;
  check_hierarchy(h);
  return h;
}

double cache_area_mm2(const CacheParams& c, const CacheTimingModel& model) {
  return 2 * model.area_mm2(l1_geometry(c)) + model.area_mm2(l2_geometry(c));
}

std::uint32_t axis_value(const MachineConfig& m, Axis a) {
  switch (a) {
    case Axis::l1_kb: return m.cache.l1_kb;
    case Axis::l2_kb: return m.cache.l2_kb;
    case Axis::phys_regs: return m.core.phys_regs;
    case Axis::rob: return m.core.rob_size;
    case Axis::iq: return m.core.iq_size;
    case Axis::lsq: return m.core.lsq_size;
  }
  throw std::logic_error("bad axis");
}

MachineConfig with_axis(MachineConfig m, Axis a, std::uint32_t v) {
  switch (a) {
    case Axis::l1_kb: m.cache.l1_kb = v; break;
    case Axis::l2_kb: m.cache.l2_kb = v; break;
    case Axis::phys_regs: m.core.phys_regs = v; break;
    case Axis::rob: m.core.rob_size = v; break;
    case Axis::iq: m.core.iq_size = v; break;
    case Axis::lsq: m.core.lsq_size = v; break;
  }
  return m;
}

double per_pen(std::uint64_t cycles_cfg, std::uint64_t cycles_ref) {
  if (cycles_cfg == 0 || cycles_ref == 0) throw std::invalid_argument("per_pen needs positive cycle counts");
  return (static_cast<double>(cycles_ref) / static_cast<double>(cycles_cfg) - 1.0) * 100.0;
}

std::vector<Benchmark> make_benchmarks(const std::vector<KernelSpec>& specs) {
  std::vector<Benchmark> out;
  for (const auto& s : specs) {
    const KernelSpec resolved = resolve_kernel_spec(s);
    out.push_back({resolved, gen_kernel(resolved)});
  }
  return out;
}

Runner::Runner(std::vector<Benchmark> benchmarks, CacheTimingModel model, unsigned jobs)
    : benchmarks_(std::move(benchmarks)), model_(std::move(model)), jobs_(jobs) {
  if (benchmarks_.empty()) throw ConfigError("at least one benchmark is required");
  if (jobs_ == 0) jobs_ = std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::vector<SimResult>> Runner::run(const std::vector<MachineConfig>& configs) {
  struct Task {
    std::size_t cfg;
    std::size_t bench;
  };
  std::vector<std::string> keys;
  std::vector<HierarchyConfig> hiers(configs.size());
  std::vector<std::size_t> fresh;  // indices of configs not yet simulated, deduplicated
  for (std::size_t c = 0; c < configs.size(); ++c) {
    keys.push_back(canonical(configs[c]));
    if (memo_.count(keys[c]) || std::find(keys.begin(), keys.end() - 1, keys[c]) != keys.end() - 1) continue;
    try {
      check_core(configs[c].core);
      hiers[c] = build_hierarchy(configs[c], model_);
    } catch (const std::exception& e) {
      throw DseError(fmt::format("invalid configuration {}: {}", keys[c], e.what()));
    }
    fresh.push_back(c);
  }

  std::vector<Task> tasks;
  for (std::size_t c : fresh) {
    for (std::size_t b = 0; b < benchmarks_.size(); ++b) tasks.push_back({c, b});
  }
  std::vector<SimResult> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        results[t] = simulate(benchmarks_[tasks[t].bench].trace, configs[tasks[t].cfg].core, hiers[tasks[t].cfg]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(jobs_, tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!errors[t]) continue;
    try {
      std::rethrow_exception(errors[t]);
    } catch (const std::exception& e) {
      throw DseError(fmt::format("benchmark {} on {}: {}", benchmarks_[tasks[t].bench].spec.kernel,
                                 keys[tasks[t].cfg], e.what()));
    }
  }
  simulations_ += tasks.size();

  for (std::size_t i = 0; i < tasks.size();) {
    const std::size_t c = tasks[i].cfg;
    std::vector<SimResult> row(results.begin() + static_cast<std::ptrdiff_t>(i),
                               results.begin() + static_cast<std::ptrdiff_t>(i + benchmarks_.size()));
    memo_.emplace(keys[c], std::move(row));
    i += benchmarks_.size();
  }
  std::vector<std::vector<SimResult>> out;
  for (const auto& k : keys) out.push_back(memo_.at(k));
  return out;
}

std::string SweepPoint::label() const {
  return l2_kb ? fmt::format("{}-{}", value, *l2_kb) : fmt::format("{}", value);
}

SweepResult run_sweep(const SweepSpec& spec, Runner& runner) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 1; i < spec.values.size(); ++i) {
    if (spec.values[i] <= spec.values[i - 1]) throw ConfigError("sweep values must be strictly increasing");
  }
  std::vector<MachineConfig> configs{spec.baseline};
  for (auto v : spec.values) configs.push_back(with_axis(spec.baseline, spec.axis, v));
  std::vector<std::vector<SimResult>> res;
  try {
    res = runner.run(configs);
  } catch (const DseError& e) {
    throw DseError(fmt::format("{} sweep: {}", axis_name(spec.axis), e.what()));
  }

  SweepResult r;
  r.axis = axis_name(spec.axis);
  r.benchmarks = benchmark_names(runner);
  for (const auto& s : res[0]) r.baseline_cycles.push_back(s.roi_cycles);
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    SweepPoint p = measure(res[i + 1]);
    p.value = spec.values[i];
    r.points.push_back(std::move(p));
  }
  score(r);
  if (spec.axis == Axis::l1_kb || spec.axis == Axis::l2_kb) {
    for (std::size_t i = 0; i < r.points.size(); ++i) add_area(r.points[i], configs[i + 1].cache, runner.model());
  }
  return r;
}

SweepResult run_cache_sweep(const std::vector<std::uint32_t>& l1_kb, const std::vector<std::uint32_t>& l2_kb,
                            const MachineConfig& baseline, Runner& runner) {
  std::vector<MachineConfig> configs{baseline};
  for (auto l1 : l1_kb) {
    for (auto l2 : l2_kb) {
      if (l2 < l1) continue;
      MachineConfig m = baseline;
      m.cache.l1_kb = l1;
      m.cache.l2_kb = l2;
      configs.push_back(m);
    }
  }
  if (configs.size() == 1) throw ConfigError("cache grid has no pair with l2_kb >= l1_kb");
  std::vector<std::vector<SimResult>> res;
  try {
    res = runner.run(configs);
  } catch (const DseError& e) {
    throw DseError(fmt::format("l1_l2 sweep: {}", e.what()));
  }

  SweepResult r;
  r.axis = "l1_l2";
  r.benchmarks = benchmark_names(runner);
  for (const auto& s : res[0]) r.baseline_cycles.push_back(s.roi_cycles);
  for (std::size_t i = 1; i < configs.size(); ++i) {
    SweepPoint p = measure(res[i]);
    p.value = configs[i].cache.l1_kb;
    p.l2_kb = configs[i].cache.l2_kb;
    r.points.push_back(std::move(p));
  }
  score(r);
  for (std::size_t i = 0; i < r.points.size(); ++i) add_area(r.points[i], configs[i + 1].cache, runner.model());
  return r;
}

std::size_t find_best(const std::vector<double>& avg, double epsilon_pp) {
  if (avg.empty()) throw std::invalid_argument("find_best on an empty curve");
  const double top = *std::max_element(avg.begin(), avg.end());
  for (std::size_t i = 0; i < avg.size(); ++i) {
    if (avg[i] >= top - epsilon_pp) return i;
  }
  return static_cast<std::size_t>(std::max_element(avg.begin(), avg.end()) - avg.begin());
}

std::optional<std::size_t> find_optimum(const std::vector<double>& avg, double threshold_pp, double epsilon_pp) {
  const std::size_t best = find_best(avg, epsilon_pp);
  for (std::size_t i = 0; i <= best; ++i) {
    if (avg[i] >= avg[best] - threshold_pp) return i;
  }
  return std::nullopt;
}

std::uint32_t find_best(const Curve& c, double epsilon_pp) {
  check_curve(c);
  return c[find_best(avgs(c), epsilon_pp)].first;
}

std::optional<std::uint32_t> find_optimum(const Curve& c, double threshold_pp, double epsilon_pp) {
  check_curve(c);
  const auto i = find_optimum(avgs(c), threshold_pp, epsilon_pp);
  if (!i) return std::nullopt;
  return c[*i].first;
}

ExtractionResult extract(const SweepResult& r, double threshold_pp, double epsilon_pp) {
  std::vector<double> avg;
  for (const auto& p : r.points) avg.push_back(p.avg_per_pen);
  ExtractionResult e;
  e.axis = r.axis;
  e.threshold_pp = threshold_pp;
  e.epsilon_pp = epsilon_pp;
  e.best_index = find_best(avg, epsilon_pp);
  e.best = r.points[e.best_index].label();
  e.optimum_index = find_optimum(avg, threshold_pp, epsilon_pp);
  if (e.optimum_index) e.optimum = r.points[*e.optimum_index].label();
  const double top = *std::max_element(avg.begin(), avg.end());
  e.saturation_detected = e.best_index + 1 < avg.size();
  for (std::size_t i = e.best_index + 1; i < avg.size(); ++i) {
    if (avg[i] < top - epsilon_pp) e.degradation_detected = true;
  }
  return e;
}

const std::vector<std::uint32_t>& Grids::of(Axis a) const {
  switch (a) {
    case Axis::l1_kb: return l1_kb;
    case Axis::l2_kb: return l2_kb;
    case Axis::phys_regs: return phys_regs;
    case Axis::rob: return rob;
    case Axis::iq: return iq;
    case Axis::lsq: return lsq;
  }
  throw std::logic_error("bad axis");
}

void check_grids(const Grids& g) {
  for (const auto& [axis, name] : kAxisNames) {
    const auto& v = g.of(axis);
    if (v.empty()) throw ConfigError(fmt::format("grid '{}' is empty", name));
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] <= v[i - 1]) throw ConfigError(fmt::format("grid '{}' must be strictly increasing", name));
    }
  }
}

ExploreReport staged_explore(const ExploreSpec& spec, Runner& runner) {
  check_grids(spec.grids);
  ExploreReport rep;
  auto stage = [&](int n, const char* name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      throw DseError(fmt::format("stage {} ({}): {}", n, name, e.what()));
    }
  };

  // Stage 1: joint L1 x L2 sweep on a scalar pipeline.
  MachineConfig bcs = spec.baseline;
  stage(1, "cache", [&] {
    MachineConfig ref = spec.baseline;
    ref.core.set_all_widths(1);
    rep.cache.stage = "cache";
    rep.cache.reference = ref;
    rep.cache.sweep = run_cache_sweep(spec.grids.l1_kb, spec.grids.l2_kb, ref, runner);
    rep.cache.extraction = extract(rep.cache.sweep, spec.threshold_pp, spec.epsilon_pp);
    const auto& best = rep.cache.sweep.points[rep.cache.extraction.best_index];
    bcs.cache.l1_kb = best.value;
    bcs.cache.l2_kb = *best.l2_kb;
    rep.best_cache_area_mm2 = best.area_mm2;
    const auto opt = rep.cache.extraction.optimum_index.value_or(rep.cache.extraction.best_index);
    rep.optimum_cache_area_mm2 = rep.cache.sweep.points[opt].area_mm2;
  });

  // Stage 2: register file at the best cache size, full-width pipeline.
  MachineConfig window_ref = bcs;
  stage(2, "phys_regs", [&] {
    rep.phys_regs.stage = "phys_regs";
    rep.phys_regs.reference = bcs;
    rep.phys_regs.sweep = run_sweep({Axis::phys_regs, spec.grids.phys_regs, bcs}, runner);
    rep.phys_regs.extraction = extract(rep.phys_regs.sweep, spec.threshold_pp, spec.epsilon_pp);
    const auto& e = rep.phys_regs.extraction;
    window_ref.core.phys_regs = rep.phys_regs.sweep.points[e.optimum_index.value_or(e.best_index)].value;
  });

  // Stage 3: window structures, each swept on its own.
  rep.final_config = window_ref;
  for (Axis a : {Axis::rob, Axis::iq, Axis::lsq}) {
    const std::string name = axis_name(a);
    stage(3, name.c_str(), [&] {
      StageReport s;
      s.stage = name;
      s.reference = window_ref;
      s.sweep = run_sweep({a, spec.grids.of(a), window_ref}, runner);
      s.extraction = extract(s.sweep, spec.threshold_pp, spec.epsilon_pp);
      const auto& e = s.extraction;
      rep.final_config = with_axis(rep.final_config, a, s.sweep.points[e.optimum_index.value_or(e.best_index)].value);
      rep.window.push_back(std::move(s));
    });
  }
  return rep;
}

}  // namespace uarch
