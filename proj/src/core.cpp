#include "uarch/core.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <limits>
#include <set>
#include <vector>

#include <fmt/format.h>

namespace uarch {

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

std::uint32_t exec_latency(const CoreConfig& c, Kind k) {
  switch (k) {
    case Kind::mul: return c.latencies.mul;
    case Kind::div: return c.latencies.div;
    default: return c.latencies.alu;
  }
}

bool overlaps(const InstructionRecord& a, const InstructionRecord& b) {
  const std::uint64_t a0 = *a.addr, a1 = a0 + *a.size;
  const std::uint64_t b0 = *b.addr, b1 = b0 + *b.size;
  return a0 < b1 && b0 < a1;
}

bool same_access(const InstructionRecord& a, const InstructionRecord& b) {
  return *a.addr == *b.addr && *a.size == *b.size;
}

// Data access split at L1D line boundaries; latency is the slower half.
std::uint32_t data_access(CacheHierarchy& h, const InstructionRecord& r, bool is_write) {
  const std::uint64_t line = h.config().l1d.geometry.line_bytes;
  const std::uint64_t first = *r.addr;
  const std::uint64_t last = first + *r.size - 1;
  if (first / line == last / line) return h.access(first, *r.size, is_write, Port::data);
  const std::uint64_t split = (first / line + 1) * line;
  const auto a = h.access(first, static_cast<std::uint32_t>(split - first), is_write, Port::data);
  const auto b = h.access(split, static_cast<std::uint32_t>(last + 1 - split), is_write, Port::data);
  return std::max(a, b);
}

class Pipeline {
 public:
  Pipeline(const Trace& trace, const CoreConfig& core, const HierarchyConfig& hier,
           const SimOptions& opts)
      : trace_(trace),
        recs_(trace.records),
        cfg_(core),
        opts_(opts),
        caches_(hier),
        rob_(core.rob_size),
        preg_ready_(core.phys_regs, kNever),
        predictor_(core.predictor_entries, 1) {
    for (int r = 0; r < kLogicalRegs; ++r) {
      rename_[r] = static_cast<std::uint16_t>(r);
      preg_ready_[r] = 0;
    }
    for (std::uint32_t p = kLogicalRegs; p < core.phys_regs; ++p) {
      free_list_.push_back(static_cast<std::uint16_t>(p));
    }
    iline_bytes_ = hier.l1i.geometry.line_bytes;
    ihit_ = std::max<std::uint32_t>(1, hier.l1i.hit_cycles);
    fetch_capacity_ = std::size_t{core.fetch_width} * ihit_;
  }

  SimResult run();

 private:
  struct FetchedOp {
    std::uint32_t rec;
    std::uint64_t ready;  // first cycle the next stage may take it
    bool mispredicted;
  };

  struct RobEntry {
    std::uint32_t rec = 0;
    std::int32_t dst = -1;
    std::int32_t prev = -1;
    std::int32_t src[2] = {-1, -1};
    std::uint64_t done = kNever;  // writeback cycle, known at issue
    bool mispredicted = false;
  };

  std::size_t rob_slot(std::size_t i) const { return (rob_head_ + i) % rob_.size(); }

  void commit();
  void issue();
  void dispatch();
  void decode();
  void fetch();
  bool load_ready(const RobEntry& e, bool& forward) const;
  void check_invariants() const;

  const Trace& trace_;
  const std::vector<InstructionRecord>& recs_;
  const CoreConfig& cfg_;
  const SimOptions& opts_;
  CacheHierarchy caches_;

  std::uint64_t cycle_ = 0;
  std::uint64_t committed_ = 0;

  // front end
  std::size_t fetch_next_ = 0;
  std::uint64_t fetch_busy_until_ = 0;
  std::uint64_t fetch_resume_ = 0;
  bool awaiting_resolution_ = false;
  std::deque<FetchedOp> fetch_queue_;
  std::deque<FetchedOp> decode_latch_;
  std::uint32_t iline_bytes_ = 32;
  std::uint32_t ihit_ = 1;
  std::size_t fetch_capacity_ = 1;  // groups in flight through a pipelined I-cache

  // back end
  std::vector<RobEntry> rob_;
  std::size_t rob_head_ = 0;
  std::size_t rob_count_ = 0;
  std::vector<std::uint32_t> iq_;   // rob slots, oldest first
  std::deque<std::uint32_t> lsq_;   // rob slots, oldest first
  std::uint16_t rename_[kLogicalRegs] = {};
  std::deque<std::uint16_t> free_list_;
  std::vector<std::uint64_t> preg_ready_;
  std::vector<std::uint8_t> predictor_;

  bool dispatch_stalled_ = false;

  std::uint64_t roi_open_ = 0;
  std::uint64_t roi_close_ = 0;
  SimResult res_;
};

void Pipeline::commit() {
  std::uint32_t n = 0;
  while (n < cfg_.commit_width && rob_count_ > 0) {
    RobEntry& e = rob_[rob_head_];
    if (e.done >= cycle_) break;
    const auto& r = recs_[e.rec];
    if (r.kind == Kind::store) data_access(caches_, r, true);
    if (r.is_mem()) {
      if (lsq_.empty() || lsq_.front() != rob_head_) {
        throw std::logic_error("LSQ out of order at commit");
      }
      lsq_.pop_front();
    }
    if (e.prev >= 0) free_list_.push_back(static_cast<std::uint16_t>(e.prev));
    if (opts_.on_commit) opts_.on_commit(e.rec, cycle_);
    const std::size_t pos = std::size_t{e.rec} + 1;
    if (trace_.roi_begin && *trace_.roi_begin == pos) roi_open_ = cycle_;
    if (trace_.roi_end && *trace_.roi_end == pos) roi_close_ = cycle_;
    rob_head_ = (rob_head_ + 1) % rob_.size();
    --rob_count_;
    ++committed_;
    ++n;
  }
}

bool Pipeline::load_ready(const RobEntry& e, bool& forward) const {
  const auto& ld = recs_[e.rec];
  forward = false;
  const RobEntry* youngest_overlap = nullptr;
  for (std::uint32_t slot : lsq_) {
    const RobEntry& o = rob_[slot];
    if (o.rec >= e.rec) break;
    const auto& st = recs_[o.rec];
    if (st.kind != Kind::store) continue;
    if (o.done > cycle_) return false;  // address not yet computed
    if (overlaps(st, ld)) youngest_overlap = &o;
  }
  if (youngest_overlap) {
    if (!same_access(recs_[youngest_overlap->rec], ld)) return false;
    forward = true;
  }
  return true;
}

void Pipeline::issue() {
  std::uint32_t n = 0;
  std::size_t keep = 0;
  for (std::size_t i = 0; i < iq_.size(); ++i) {
    const std::uint32_t slot = iq_[i];
    RobEntry& e = rob_[slot];
    bool go = n < cfg_.issue_width;
    for (int s = 0; go && s < 2; ++s) {
      if (e.src[s] >= 0 && preg_ready_[e.src[s]] > cycle_) go = false;
    }
    const auto& r = recs_[e.rec];
    bool forward = false;
    if (go && r.kind == Kind::load) go = load_ready(e, forward);
    if (!go) {
      iq_[keep++] = slot;
      continue;
    }
    std::uint32_t lat = exec_latency(cfg_, r.kind);
    if (r.kind == Kind::load) lat = forward ? 1 : data_access(caches_, r, false);
    e.done = cycle_ + lat;
    if (e.dst >= 0) preg_ready_[e.dst] = e.done;
    if (r.kind == Kind::branch && !cfg_.perfect_branch_prediction) {
      auto& ctr = predictor_[r.sid & (cfg_.predictor_entries - 1)];
      if (*r.taken) {
        if (ctr < 3) ++ctr;
      } else if (ctr > 0) {
        --ctr;
      }
      if (e.mispredicted) {
        awaiting_resolution_ = false;
        fetch_resume_ = cycle_ + cfg_.mispredict_penalty_cycles + 1;
      }
    }
    ++n;
  }
  iq_.resize(keep);
}

void Pipeline::dispatch() {
  dispatch_stalled_ = false;
  std::uint32_t n = 0;
  while (n < cfg_.dispatch_width && !decode_latch_.empty() &&
         decode_latch_.front().ready <= cycle_) {
    const FetchedOp op = decode_latch_.front();
    const auto& r = recs_[op.rec];
    StallCycles& st = res_.stall_cycles;
    if (rob_count_ >= rob_.size()) {
      ++st.rob_full;
    } else if (iq_.size() >= cfg_.iq_size) {
      ++st.iq_full;
    } else if (r.is_mem() && lsq_.size() >= cfg_.lsq_size) {
      ++st.lsq_full;
    } else if (r.dst && free_list_.empty()) {
      ++st.no_phys_reg;
    } else {
      const std::size_t slot = rob_slot(rob_count_);
      RobEntry& e = rob_[slot];
      e = RobEntry{};
      e.rec = op.rec;
      e.mispredicted = op.mispredicted;
      if (r.src1) e.src[0] = rename_[*r.src1];
      if (r.src2) e.src[1] = rename_[*r.src2];
      if (r.dst) {
        const std::uint16_t p = free_list_.front();
        free_list_.pop_front();
        e.prev = rename_[*r.dst];
        e.dst = p;
        rename_[*r.dst] = p;
        preg_ready_[p] = kNever;
      }
      ++rob_count_;
      iq_.push_back(static_cast<std::uint32_t>(slot));
      if (r.is_mem()) lsq_.push_back(static_cast<std::uint32_t>(slot));
      decode_latch_.pop_front();
      ++n;
      continue;
    }
    dispatch_stalled_ = true;
    break;
  }
}

void Pipeline::decode() {
  std::uint32_t n = 0;
  while (n < cfg_.decode_width && !fetch_queue_.empty() && fetch_queue_.front().ready <= cycle_ &&
         decode_latch_.size() < cfg_.decode_width) {
    FetchedOp op = fetch_queue_.front();
    fetch_queue_.pop_front();
    op.ready = cycle_ + 1;
    decode_latch_.push_back(op);
    ++n;
  }
}

void Pipeline::fetch() {
  if (fetch_next_ >= recs_.size()) return;
  if (awaiting_resolution_ || cycle_ < fetch_resume_ || cycle_ < fetch_busy_until_) {
    if (!dispatch_stalled_) ++res_.stall_cycles.fetch_stall;
    return;
  }
  if (fetch_queue_.size() + cfg_.fetch_width > fetch_capacity_) return;
  const std::size_t room = cfg_.fetch_width;

  const auto& first = recs_[fetch_next_];
  const std::uint32_t lat = caches_.access(first.pc(), 4, false, Port::ifetch);
  const std::uint64_t line = first.pc() / iline_bytes_;
  const std::uint64_t ready = cycle_ + lat;
  // Hits are pipelined; a miss holds the fetch unit until the line arrives.
  fetch_busy_until_ = lat > ihit_ ? cycle_ + lat : cycle_ + 1;

  for (std::size_t n = 0; n < room && fetch_next_ < recs_.size(); ++n) {
    const auto& r = recs_[fetch_next_];
    if (n > 0 && r.pc() / iline_bytes_ != line) break;
    FetchedOp op{static_cast<std::uint32_t>(fetch_next_), ready, false};
    ++fetch_next_;
    if (r.kind == Kind::branch) {
      ++res_.branch.branches;
      bool predicted_taken = *r.taken;
      if (!cfg_.perfect_branch_prediction) {
        predicted_taken = predictor_[r.sid & (cfg_.predictor_entries - 1)] >= 2;
      }
      if (predicted_taken != *r.taken) {
        ++res_.branch.mispredicts;
        op.mispredicted = true;
        awaiting_resolution_ = true;
      }
      fetch_queue_.push_back(op);
      if (predicted_taken || op.mispredicted) break;
      continue;
    }
    fetch_queue_.push_back(op);
  }
}

void Pipeline::check_invariants() const {
  if (rob_count_ > cfg_.rob_size) throw std::logic_error("ROB over capacity");
  if (iq_.size() > cfg_.iq_size) throw std::logic_error("IQ over capacity");
  if (lsq_.size() > cfg_.lsq_size) throw std::logic_error("LSQ over capacity");
  const std::size_t allocated = cfg_.phys_regs - free_list_.size();
  if (allocated > cfg_.phys_regs || allocated < static_cast<std::size_t>(kLogicalRegs)) {
    throw std::logic_error("physical register accounting broken");
  }
  if (!std::is_sorted(iq_.begin(), iq_.end(), [&](std::uint32_t a, std::uint32_t b) {
        return rob_[a].rec < rob_[b].rec;
      })) {
    throw std::logic_error("IQ not in age order");
  }
}

SimResult Pipeline::run() {
  const std::size_t n = recs_.size();
  std::uint64_t last_progress = 0;
  std::uint64_t last_committed = 0;
  while (committed_ < n) {
    ++cycle_;
    commit();
    if (committed_ == n) break;
    issue();
    dispatch();
    decode();
    fetch();
    if (opts_.check_invariants) check_invariants();
    if (committed_ != last_committed) {
      last_committed = committed_;
      last_progress = cycle_;
    } else if (cycle_ - last_progress > opts_.deadlock_cycles) {
      throw std::logic_error(fmt::format("no commit progress for {} cycles at record {}",
                                         opts_.deadlock_cycles, committed_));
    }
  }
  res_.total_cycles = cycle_;
  res_.committed_instructions = committed_;
  if (trace_.roi_begin && trace_.roi_end) {
    res_.roi_cycles = roi_close_ - roi_open_;
    res_.roi_committed_instructions = *trace_.roi_end - *trace_.roi_begin;
  } else {
    res_.roi_cycles = res_.total_cycles;
    res_.roi_committed_instructions = committed_;
  }
  res_.ipc_roi = res_.roi_cycles == 0 ? 0.0
                                      : static_cast<double>(res_.roi_committed_instructions) /
                                            static_cast<double>(res_.roi_cycles);
  res_.cache = caches_.stats();
  return res_;
}

}  // namespace

std::uint32_t CoreConfig::min_width() const {
  return std::min({fetch_width, decode_width, dispatch_width, issue_width, commit_width});
}

void check_core(const CoreConfig& c) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  need(c.fetch_width >= 1 && c.decode_width >= 1 && c.dispatch_width >= 1 && c.issue_width >= 1 &&
           c.commit_width >= 1,
       "all pipeline widths must be at least 1");
  need(c.rob_size >= 1, "rob_size must be at least 1");
  need(c.iq_size >= 1, "iq_size must be at least 1");
  need(c.lsq_size >= 1, "lsq_size must be at least 1");
  need(c.phys_regs >= kLogicalRegs + 1, "phys_regs must be at least 33");
  need(c.phys_regs <= 65535, "phys_regs must fit in 16 bits");
  need(c.predictor_entries >= 1 && std::has_single_bit(c.predictor_entries),
       "predictor_entries must be a power of two");
  need(c.latencies.alu >= 1 && c.latencies.mul >= 1 && c.latencies.div >= 1,
       "execute latencies must be at least 1");
  need(c.clock_ghz > 0.0, "clock_ghz must be positive");
}

SimResult simulate(const Trace& trace, const CoreConfig& core, const HierarchyConfig& hier,
                   const SimOptions& opts) {
  check_core(core);
  check_hierarchy(hier);
  if (auto v = validate_trace(trace); !v.empty()) {
    throw std::invalid_argument(
        fmt::format("invalid trace (record {}): {}", v.front().index, v.front().message));
  }
  Pipeline p(trace, core, hier, opts);
  return p.run();
}

bool is_degenerate(const Trace& trace, const CoreConfig& c, const HierarchyConfig& h) {
  const std::size_t n = trace.records.size();
  return c.fetch_width == 1 && c.decode_width == 1 && c.dispatch_width == 1 &&
         c.issue_width == 1 && c.commit_width == 1 && c.rob_size >= n && c.iq_size >= n &&
         c.lsq_size >= n && c.phys_regs >= n + kLogicalRegs && c.perfect_branch_prediction &&
         h.perfect;
}

// Per-instruction recurrence. With one slot per stage, instruction k is
// fetched in cycle k + 1 (the instruction cache is pipelined), reaches the
// issue stage h + 2 cycles after fetch (h = instruction-cache hit latency), issues in the first free issue slot
// at or after its operands (and memory-ordering conditions) are satisfied,
// and commits one cycle after writeback but never before its predecessor.
// Oldest-first selection means an instruction's issue slot only depends on
// older instructions, so reserving slots in program order reproduces it.
std::uint64_t analytic_cycles(const Trace& trace, const CoreConfig& c, const HierarchyConfig& h) {
  check_core(c);
  check_hierarchy(h);
  if (!is_degenerate(trace, c, h)) {
    throw ConfigError("analytic_cycles requires the degenerate width-1 configuration");
  }
  const auto& recs = trace.records;
  const std::uint64_t ih = h.l1i.hit_cycles;
  const std::uint64_t dh = h.l1d.hit_cycles;

  std::uint64_t producer[kLogicalRegs] = {};  // writeback cycle of the latest writer
  std::vector<std::uint64_t> wb(recs.size()), commit(recs.size());
  std::set<std::uint64_t> taken_slots;
  std::vector<std::size_t> stores;
  std::uint64_t store_addr_known = 0;  // max writeback over older stores
  std::uint64_t prev_commit = 0;

  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto& r = recs[k];
    const std::uint64_t fetch = k + 1;
    std::uint64_t ready = fetch + ih + 2;
    if (r.src1) ready = std::max(ready, producer[*r.src1]);
    if (r.src2) ready = std::max(ready, producer[*r.src2]);

    const InstructionRecord* youngest = nullptr;
    std::size_t youngest_idx = 0;
    if (r.kind == Kind::load) {
      ready = std::max(ready, store_addr_known);
      for (auto it = stores.rbegin(); it != stores.rend(); ++it) {
        if (overlaps(recs[*it], r)) {
          youngest = &recs[*it];
          youngest_idx = *it;
          break;
        }
      }
      if (youngest && !same_access(*youngest, r)) ready = std::max(ready, commit[youngest_idx]);
    }

    std::uint64_t slot = ready;
    while (taken_slots.count(slot)) ++slot;
    taken_slots.insert(slot);

    std::uint64_t lat = exec_latency(c, r.kind);
    if (r.kind == Kind::load) {
      const bool forward = youngest && same_access(*youngest, r) && slot < commit[youngest_idx];
      lat = forward ? 1 : dh;
    }
    wb[k] = slot + lat;
    if (r.dst) producer[*r.dst] = wb[k];
    if (r.kind == Kind::store) {
      stores.push_back(k);
      store_addr_known = std::max(store_addr_known, wb[k]);
    }
    commit[k] = std::max(wb[k] + 1, prev_commit + 1);
    prev_commit = commit[k];
  }
  return recs.empty() ? 0 : commit.back();
}

}  // namespace uarch
