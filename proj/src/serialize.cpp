#include "uarch/serialize.hpp"

#include <limits>
#include <set>

#include <fmt/format.h>

namespace uarch {

namespace {

// Strict field reader over one JSON object.
class Fields {
 public:
  Fields(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", what_));
  }
  Fields(const Fields&) = delete;

  const json* take(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void u32(const char* key, std::uint32_t& v) {
    std::uint64_t wide = v;
    u64(key, wide);
    if (wide > std::numeric_limits<std::uint32_t>::max()) fail(key, "value too large");
    v = static_cast<std::uint32_t>(wide);
  }
  void u64(const char* key, std::uint64_t& v) {
    if (const json* x = take(key)) {
      if (!x->is_number_unsigned()) fail(key, "expected a non-negative integer");
      v = x->get<std::uint64_t>();
    }
  }
  void i64(const char* key, std::int64_t& v) {
    if (const json* x = take(key)) {
      if (!x->is_number_integer()) fail(key, "expected an integer");
      v = x->get<std::int64_t>();
    }
  }
  void f64(const char* key, double& v) {
    if (const json* x = take(key)) {
      if (!x->is_number()) fail(key, "expected a number");
      v = x->get<double>();
    }
  }
  void boolean(const char* key, bool& v) {
    if (const json* x = take(key)) {
      if (!x->is_boolean()) fail(key, "expected true or false");
      v = x->get<bool>();
    }
  }
  void str(const char* key, std::string& v) {
    if (const json* x = take(key)) {
      if (!x->is_string()) fail(key, "expected a string");
      v = x->get<std::string>();
    }
  }
  void u32_list(const char* key, std::vector<std::uint32_t>& v) {
    if (const json* x = take(key)) {
      if (!x->is_array()) fail(key, "expected an array");
      v.clear();
      for (const auto& e : *x) {
        if (!e.is_number_unsigned() || e.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
          fail(key, "expected non-negative integers");
        }
        v.push_back(e.get<std::uint32_t>());
      }
    }
  }
  template <typename T>
  void obj(const char* key, T& v) {
    if (const json* x = take(key)) from_json(*x, v);
  }

  // Rejects keys that no reader asked for.
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(fmt::format("{}: unknown key '{}'", what_, it.key()));
    }
  }

 private:
  [[noreturn]] void fail(const char* key, const char* why) const {
    throw ConfigError(fmt::format("{}.{}: {}", what_, key, why));
  }

  const json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

template <typename T>
std::vector<T> list_of(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(fmt::format("{}: expected an array", what));
  std::vector<T> out;
  for (const auto& e : j) {
    T v{};
    from_json(e, v);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

void to_json(json& j, const LevelStats& s) {
  j = {{"accesses", s.accesses}, {"hits", s.hits}, {"misses", s.misses},
       {"writebacks", s.writebacks}, {"miss_rate", s.miss_rate()}};
}

void from_json(const json& j, LevelStats& s) {
  Fields f(j, "level stats");
  f.u64("accesses", s.accesses);
  f.u64("hits", s.hits);
  f.u64("misses", s.misses);
  f.u64("writebacks", s.writebacks);
  f.take("miss_rate");  // derived
  f.done();
}

void to_json(json& j, const CacheStats& s) { j = {{"l1i", s.l1i}, {"l1d", s.l1d}, {"l2", s.l2}}; }

void from_json(const json& j, CacheStats& s) {
  Fields f(j, "cache stats");
  f.obj("l1i", s.l1i);
  f.obj("l1d", s.l1d);
  f.obj("l2", s.l2);
  f.done();
}

void to_json(json& j, const StallCycles& s) {
  j = {{"rob_full", s.rob_full}, {"iq_full", s.iq_full}, {"lsq_full", s.lsq_full},
       {"no_phys_reg", s.no_phys_reg}, {"fetch_stall", s.fetch_stall}};
}

void from_json(const json& j, StallCycles& s) {
  Fields f(j, "stall_cycles");
  f.u64("rob_full", s.rob_full);
  f.u64("iq_full", s.iq_full);
  f.u64("lsq_full", s.lsq_full);
  f.u64("no_phys_reg", s.no_phys_reg);
  f.u64("fetch_stall", s.fetch_stall);
  f.done();
}

void to_json(json& j, const BranchStats& s) { j = {{"branches", s.branches}, {"mispredicts", s.mispredicts}}; }

void from_json(const json& j, BranchStats& s) {
  Fields f(j, "branch");
  f.u64("branches", s.branches);
  f.u64("mispredicts", s.mispredicts);
  f.done();
}

void to_json(json& j, const SimResult& r) {
  j = {{"total_cycles", r.total_cycles},
       {"roi_cycles", r.roi_cycles},
       {"committed_instructions", r.committed_instructions},
       {"roi_committed_instructions", r.roi_committed_instructions},
       {"ipc_roi", r.ipc_roi},
       {"stall_cycles", r.stall_cycles},
       {"branch", r.branch},
       {"cache", r.cache}};
}

void from_json(const json& j, SimResult& r) {
  Fields f(j, "sim result");
  f.u64("total_cycles", r.total_cycles);
  f.u64("roi_cycles", r.roi_cycles);
  f.u64("committed_instructions", r.committed_instructions);
  f.u64("roi_committed_instructions", r.roi_committed_instructions);
  f.f64("ipc_roi", r.ipc_roi);
  f.obj("stall_cycles", r.stall_cycles);
  f.obj("branch", r.branch);
  f.obj("cache", r.cache);
  f.done();
}

void to_json(json& j, const Latencies& l) { j = {{"alu", l.alu}, {"mul", l.mul}, {"div", l.div}}; }

void from_json(const json& j, Latencies& l) {
  Fields f(j, "core.latencies");
  f.u32("alu", l.alu);
  f.u32("mul", l.mul);
  f.u32("div", l.div);
  f.done();
}

void to_json(json& j, const CoreConfig& c) {
  j = {{"fetch_width", c.fetch_width},
       {"decode_width", c.decode_width},
       {"dispatch_width", c.dispatch_width},
       {"issue_width", c.issue_width},
       {"commit_width", c.commit_width},
       {"rob_size", c.rob_size},
       {"iq_size", c.iq_size},
       {"lsq_size", c.lsq_size},
       {"phys_regs", c.phys_regs},
       {"predictor_entries", c.predictor_entries},
       {"mispredict_penalty_cycles", c.mispredict_penalty_cycles},
       {"latencies", c.latencies},
       {"clock_ghz", c.clock_ghz},
       {"perfect_branch_prediction", c.perfect_branch_prediction}};
}

void from_json(const json& j, CoreConfig& c) {
  Fields f(j, "core");
  f.u32("fetch_width", c.fetch_width);
  f.u32("decode_width", c.decode_width);
  f.u32("dispatch_width", c.dispatch_width);
  f.u32("issue_width", c.issue_width);
  f.u32("commit_width", c.commit_width);
  f.u32("rob_size", c.rob_size);
  f.u32("iq_size", c.iq_size);
  f.u32("lsq_size", c.lsq_size);
  f.u32("phys_regs", c.phys_regs);
  f.u32("predictor_entries", c.predictor_entries);
  f.u32("mispredict_penalty_cycles", c.mispredict_penalty_cycles);
  f.obj("latencies", c.latencies);
  f.f64("clock_ghz", c.clock_ghz);
  f.boolean("perfect_branch_prediction", c.perfect_branch_prediction);
  f.done();
}

void to_json(json& j, const CacheParams& c) {
  j = {{"l1_kb", c.l1_kb},
       {"l2_kb", c.l2_kb},
       {"l1_line_bytes", c.l1_line_bytes},
       {"l2_line_bytes", c.l2_line_bytes},
       {"l1_assoc", c.l1_assoc},
       {"l2_assoc", c.l2_assoc},
       {"banks", c.banks},
       {"rw_ports", c.rw_ports},
       {"tech_nm", c.tech_nm},
       {"temperature_k", c.temperature_k},
       {"l1_hit_cycles", c.l1_hit_cycles},
       {"l2_hit_cycles", c.l2_hit_cycles},
       {"mem_cycles", c.mem_cycles},
       {"use_delay_model", c.use_delay_model}};
}

void from_json(const json& j, CacheParams& c) {
  Fields f(j, "cache");
  f.u32("l1_kb", c.l1_kb);
  f.u32("l2_kb", c.l2_kb);
  f.u32("l1_line_bytes", c.l1_line_bytes);
  f.u32("l2_line_bytes", c.l2_line_bytes);
  f.u32("l1_assoc", c.l1_assoc);
  f.u32("l2_assoc", c.l2_assoc);
  f.u32("banks", c.banks);
  f.u32("rw_ports", c.rw_ports);
  f.u32("tech_nm", c.tech_nm);
  f.f64("temperature_k", c.temperature_k);
  f.u32("l1_hit_cycles", c.l1_hit_cycles);
  f.u32("l2_hit_cycles", c.l2_hit_cycles);
  f.u32("mem_cycles", c.mem_cycles);
  f.boolean("use_delay_model", c.use_delay_model);
  f.done();
}

void to_json(json& j, const MachineConfig& m) { j = {{"core", m.core}, {"cache", m.cache}}; }

void from_json(const json& j, MachineConfig& m) {
  Fields f(j, "machine");
  f.obj("core", m.core);
  f.obj("cache", m.cache);
  f.done();
}

void to_json(json& j, const KernelSpec& k) {
  j = {{"kernel", k.kernel}, {"params", k.params}, {"seed", k.seed}};
}

void from_json(const json& j, KernelSpec& k) {
  Fields f(j, "benchmark");
  f.str("kernel", k.kernel);
  if (const json* p = f.take("params")) {
    Fields pf(*p, "benchmark.params");
    for (auto it = p->begin(); it != p->end(); ++it) {
      std::int64_t v = 0;
      pf.i64(it.key().c_str(), v);
      k.params[it.key()] = v;
    }
    pf.done();
  }
  f.u64("seed", k.seed);
  f.done();
  if (k.kernel.empty()) throw ConfigError("benchmark: missing 'kernel'");
}

void to_json(json& j, const Grids& g) {
  j = {{"l1_kb", g.l1_kb}, {"l2_kb", g.l2_kb}, {"phys_regs", g.phys_regs},
       {"rob", g.rob},     {"iq", g.iq},       {"lsq", g.lsq}};
}

void from_json(const json& j, Grids& g) {
  Fields f(j, "grids");
  f.u32_list("l1_kb", g.l1_kb);
  f.u32_list("l2_kb", g.l2_kb);
  f.u32_list("phys_regs", g.phys_regs);
  f.u32_list("rob", g.rob);
  f.u32_list("iq", g.iq);
  f.u32_list("lsq", g.lsq);
  f.done();
}

void to_json(json& j, const SweepPoint& p) {
  j = {{"value", p.value},
       {"label", p.label()},
       {"roi_cycles", p.roi_cycles},
       {"ipc_roi", p.ipc_roi},
       {"per_pen", p.per_pen},
       {"avg_per_pen", p.avg_per_pen}};
  if (p.l2_kb) j["l2_kb"] = *p.l2_kb;
  if (p.area_mm2 > 0) {
    j["area_mm2"] = p.area_mm2;
    j["perf_per_area"] = p.perf_per_area;
  }
}

void from_json(const json& j, SweepPoint& p) {
  Fields f(j, "sweep point");
  f.u32("value", p.value);
  f.take("label");
  if (const json* x = f.take("l2_kb")) p.l2_kb = x->get<std::uint32_t>();
  if (const json* x = f.take("roi_cycles")) p.roi_cycles = x->get<std::vector<std::uint64_t>>();
  if (const json* x = f.take("ipc_roi")) p.ipc_roi = x->get<std::vector<double>>();
  if (const json* x = f.take("per_pen")) p.per_pen = x->get<std::vector<double>>();
  f.f64("avg_per_pen", p.avg_per_pen);
  f.f64("area_mm2", p.area_mm2);
  f.f64("perf_per_area", p.perf_per_area);
  f.done();
}

void to_json(json& j, const SweepResult& r) {
  j = {{"axis", r.axis}, {"benchmarks", r.benchmarks}, {"baseline_cycles", r.baseline_cycles},
       {"points", r.points}};
}

void from_json(const json& j, SweepResult& r) {
  Fields f(j, "sweep");
  f.str("axis", r.axis);
  if (const json* x = f.take("benchmarks")) r.benchmarks = x->get<std::vector<std::string>>();
  if (const json* x = f.take("baseline_cycles")) r.baseline_cycles = x->get<std::vector<std::uint64_t>>();
  if (const json* x = f.take("points")) r.points = list_of<SweepPoint>(*x, "sweep.points");
  f.done();
}

void to_json(json& j, const ExtractionResult& e) {
  j = {{"axis", e.axis},
       {"best_size", e.best},
       {"optimum_size", e.optimum ? json(*e.optimum) : json(nullptr)},
       {"best_index", e.best_index},
       {"optimum_index", e.optimum_index ? json(*e.optimum_index) : json(nullptr)},
       {"threshold_pp", e.threshold_pp},
       {"epsilon_pp", e.epsilon_pp},
       {"saturation_detected", e.saturation_detected},
       {"degradation_detected", e.degradation_detected}};
}

void from_json(const json& j, ExtractionResult& e) {
  Fields f(j, "extraction");
  f.str("axis", e.axis);
  f.str("best_size", e.best);
  if (const json* x = f.take("optimum_size"); x && !x->is_null()) e.optimum = x->get<std::string>();
  std::uint64_t bi = 0;
  f.u64("best_index", bi);
  e.best_index = bi;
  if (const json* x = f.take("optimum_index"); x && !x->is_null()) e.optimum_index = x->get<std::size_t>();
  f.f64("threshold_pp", e.threshold_pp);
  f.f64("epsilon_pp", e.epsilon_pp);
  f.boolean("saturation_detected", e.saturation_detected);
  f.boolean("degradation_detected", e.degradation_detected);
  f.done();
}

void to_json(json& j, const StageReport& s) {
  j = {{"stage", s.stage}, {"reference", s.reference}, {"sweep", s.sweep}, {"extraction", s.extraction}};
}

void from_json(const json& j, StageReport& s) {
  Fields f(j, "stage");
  f.str("stage", s.stage);
  f.obj("reference", s.reference);
  f.obj("sweep", s.sweep);
  f.obj("extraction", s.extraction);
  f.done();
}

void to_json(json& j, const ExploreReport& r) {
  j = {{"cache", r.cache},
       {"phys_regs", r.phys_regs},
       {"window", r.window},
       {"final_config", r.final_config},
       {"best_cache_area_mm2", r.best_cache_area_mm2},
       {"optimum_cache_area_mm2", r.optimum_cache_area_mm2}};
}

void from_json(const json& j, ExploreReport& r) {
  Fields f(j, "report");
  f.obj("cache", r.cache);
  f.obj("phys_regs", r.phys_regs);
  if (const json* x = f.take("window")) r.window = list_of<StageReport>(*x, "report.window");
  f.obj("final_config", r.final_config);
  f.f64("best_cache_area_mm2", r.best_cache_area_mm2);
  f.f64("optimum_cache_area_mm2", r.optimum_cache_area_mm2);
  f.done();
}

std::string canonical(const MachineConfig& m) { return json(m).dump(); }

}  // namespace uarch
