// Two-level cache hierarchy: split L1I/L1D over a unified L2, LRU,
// write-back + write-allocate. Latencies are returned per access; there is
// no miss overlap inside the caches.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "uarch/camodel.hpp"

namespace uarch {

struct CacheConfig {
  CacheGeometry geometry;
  std::uint32_t hit_cycles = 1;
};

struct HierarchyConfig {
  CacheConfig l1i;
  CacheConfig l1d;
  CacheConfig l2;
  std::uint32_t mem_cycles = 100;
  // Every access hits its L1 with the L1 hit latency. Used by the
  // analytic timing oracle.
  bool perfect = false;
};

void check_hierarchy(const HierarchyConfig& h);

struct LevelStats {
  std::uint64_t accesses = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;

  double miss_rate() const {
    return accesses == 0 ? 0.0 : static_cast<double>(misses) / static_cast<double>(accesses);
  }
  friend bool operator==(const LevelStats&, const LevelStats&) = default;
};

struct CacheStats {
  LevelStats l1i;
  LevelStats l1d;
  LevelStats l2;
  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

enum class Port { ifetch, data };
enum class Level : std::uint8_t { l1i, l1d, l2 };

// One set-associative LRU array.
class CacheArray {
 public:
  explicit CacheArray(const CacheGeometry& g);

  struct Outcome {
    bool hit = false;
    std::optional<std::uint64_t> dirty_victim;  // line address written back
  };

  Outcome access(std::uint64_t line_addr, bool is_write);
  void reset();

  std::uint64_t line_of(std::uint64_t byte_addr) const { return byte_addr >> line_shift_; }
  std::uint64_t sets() const { return sets_; }
  std::uint32_t ways() const { return ways_; }

 private:
  struct Way {
    std::uint64_t line = 0;
    std::uint64_t stamp = 0;
    bool valid = false;
    bool dirty = false;
  };

  std::uint64_t sets_;
  std::uint32_t ways_;
  unsigned line_shift_;
  std::uint64_t clock_ = 0;
  std::vector<Way> ways_data_;
};

class CacheHierarchy {
 public:
  explicit CacheHierarchy(const HierarchyConfig& cfg);

  // addr..addr+size-1 must not cross an L1 line of the selected port.
  std::uint32_t access(std::uint64_t addr, std::uint32_t size, bool is_write, Port port);

  const CacheStats& stats() const { return stats_; }
  void reset();
  const HierarchyConfig& config() const { return cfg_; }

  struct Event {
    Level level;
    std::uint64_t line;
    bool hit;
  };
  // Records every array lookup (including writebacks into L2) when enabled.
  void record_events(bool on) { record_ = on; }
  const std::vector<Event>& events() const { return events_; }

 private:
  void note(Level lv, std::uint64_t line, bool hit);

  HierarchyConfig cfg_;
  CacheArray l1i_;
  CacheArray l1d_;
  CacheArray l2_;
  CacheStats stats_;
  bool record_ = false;
  std::vector<Event> events_;
};

}  // namespace uarch
