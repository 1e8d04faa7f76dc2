// Cycle-stepped, trace-driven out-of-order core.
//
// Six stages: fetch, decode, dispatch, issue (execute folded in),
// writeback, commit. An instruction with execute latency L that is fetched
// in cycle f and flows without stalls is decoded in f+1, dispatched in f+2,
// issued in f+3, written back in f+3+L and committed in f+4+L. Dependents
// may issue in the producer's writeback cycle. A lone 1-cycle instruction
// therefore takes 6 cycles end to end.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "uarch/cachesim.hpp"
#include "uarch/trace.hpp"

namespace uarch {

struct Latencies {
  std::uint32_t alu = 1;
  std::uint32_t mul = 3;
  std::uint32_t div = 12;
  friend bool operator==(const Latencies&, const Latencies&) = default;
};

struct CoreConfig {
  std::uint32_t fetch_width = 4;
  std::uint32_t decode_width = 4;
  std::uint32_t dispatch_width = 4;
  std::uint32_t issue_width = 4;
  std::uint32_t commit_width = 4;
  std::uint32_t rob_size = 64;
  std::uint32_t iq_size = 20;
  std::uint32_t lsq_size = 12;
  std::uint32_t phys_regs = 80;
  std::uint32_t predictor_entries = 512;
  std::uint32_t mispredict_penalty_cycles = 4;
  Latencies latencies;
  double clock_ghz = 1.0;
  // Oracle mode: every branch is predicted correctly.
  bool perfect_branch_prediction = false;

  void set_all_widths(std::uint32_t w) {
    fetch_width = decode_width = dispatch_width = issue_width = commit_width = w;
  }
  std::uint32_t min_width() const;

  friend bool operator==(const CoreConfig&, const CoreConfig&) = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void check_core(const CoreConfig& c);

struct StallCycles {
  std::uint64_t rob_full = 0;
  std::uint64_t iq_full = 0;
  std::uint64_t lsq_full = 0;
  std::uint64_t no_phys_reg = 0;
  std::uint64_t fetch_stall = 0;

  std::uint64_t total() const { return rob_full + iq_full + lsq_full + no_phys_reg + fetch_stall; }
  friend bool operator==(const StallCycles&, const StallCycles&) = default;
};

struct BranchStats {
  std::uint64_t branches = 0;
  std::uint64_t mispredicts = 0;
  friend bool operator==(const BranchStats&, const BranchStats&) = default;
};

struct SimResult {
  std::uint64_t total_cycles = 0;
  std::uint64_t roi_cycles = 0;
  std::uint64_t committed_instructions = 0;
  std::uint64_t roi_committed_instructions = 0;
  double ipc_roi = 0.0;
  StallCycles stall_cycles;
  BranchStats branch;
  CacheStats cache;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

// Debug hooks. With check_invariants set, structural bounds are asserted
// every cycle and violations throw std::logic_error.
struct SimOptions {
  bool check_invariants = false;
  std::function<void(std::size_t record_index, std::uint64_t cycle)> on_commit;
  std::uint64_t deadlock_cycles = 1'000'000;
};

SimResult simulate(const Trace& trace, const CoreConfig& core, const HierarchyConfig& hier,
                   const SimOptions& opts = {});

// Closed-form timing for the degenerate machine: all widths 1, structures
// large enough never to fill, a perfect cache hierarchy and perfect branch
// prediction. Throws ConfigError for any other configuration. Must agree
// exactly with simulate() under that configuration.
std::uint64_t analytic_cycles(const Trace& trace, const CoreConfig& core,
                              const HierarchyConfig& hier);

// True when structure sizes are large enough that analytic_cycles applies
// to this trace.
bool is_degenerate(const Trace& trace, const CoreConfig& core, const HierarchyConfig& hier);

}  // namespace uarch
