#include "uarch/cachesim.hpp"

#include <bit>
#include <stdexcept>

#include <fmt/format.h>

namespace uarch {

void check_hierarchy(const HierarchyConfig& h) {
  check_geometry(h.l1i.geometry);
  check_geometry(h.l1d.geometry);
  check_geometry(h.l2.geometry);
  if (h.l1i.hit_cycles < 1 || h.l1d.hit_cycles < 1 || h.l2.hit_cycles < 1) {
    throw std::invalid_argument("cache hit latency must be at least 1 cycle");
  }
  if (h.mem_cycles < 1) throw std::invalid_argument("memory latency must be at least 1 cycle");
  if (h.l2.geometry.capacity_bytes < h.l1d.geometry.capacity_bytes) {
    throw std::invalid_argument(fmt::format("L2 capacity {} smaller than L1D capacity {}",
                                            h.l2.geometry.capacity_bytes,
                                            h.l1d.geometry.capacity_bytes));
  }
}

CacheArray::CacheArray(const CacheGeometry& g)
    : sets_(g.sets()),
      ways_(g.associativity),
      line_shift_(static_cast<unsigned>(std::countr_zero(g.line_bytes))),
      ways_data_(sets_ * ways_) {
  check_geometry(g);
}

CacheArray::Outcome CacheArray::access(std::uint64_t line, bool is_write) {
  Way* set = &ways_data_[(line % sets_) * ways_];
  ++clock_;
  Way* victim = nullptr;
  for (std::uint32_t w = 0; w < ways_; ++w) {
    Way& way = set[w];
    if (way.valid && way.line == line) {
      way.stamp = clock_;
      way.dirty = way.dirty || is_write;
      return {true, std::nullopt};
    }
    if (!way.valid) {
      if (!victim || victim->valid) victim = &way;
    } else if (!victim || (victim->valid && way.stamp < victim->stamp)) {
      victim = &way;
    }
  }
  Outcome out;
  if (victim->valid && victim->dirty) out.dirty_victim = victim->line;
  victim->valid = true;
  victim->line = line;
  victim->dirty = is_write;
  victim->stamp = clock_;
  return out;
}

void CacheArray::reset() {
  clock_ = 0;
  for (auto& w : ways_data_) w = Way{};
}

CacheHierarchy::CacheHierarchy(const HierarchyConfig& cfg)
    : cfg_(cfg), l1i_(cfg.l1i.geometry), l1d_(cfg.l1d.geometry), l2_(cfg.l2.geometry) {
  check_hierarchy(cfg);
}

void CacheHierarchy::note(Level lv, std::uint64_t line, bool hit) {
  LevelStats& s = lv == Level::l1i ? stats_.l1i : lv == Level::l1d ? stats_.l1d : stats_.l2;
  ++s.accesses;
  if (hit) {
    ++s.hits;
  } else {
    ++s.misses;
  }
  if (record_) events_.push_back({lv, line, hit});
}

std::uint32_t CacheHierarchy::access(std::uint64_t addr, std::uint32_t size, bool is_write,
                                     Port port) {
  (void)size;
  const bool ifetch = port == Port::ifetch;
  CacheArray& l1 = ifetch ? l1i_ : l1d_;
  const CacheConfig& l1cfg = ifetch ? cfg_.l1i : cfg_.l1d;
  const Level l1lv = ifetch ? Level::l1i : Level::l1d;
  LevelStats& l1stats = ifetch ? stats_.l1i : stats_.l1d;

  const std::uint64_t line = l1.line_of(addr);
  if (cfg_.perfect) {
    note(l1lv, line, true);
    return l1cfg.hit_cycles;
  }

  const auto r1 = l1.access(line, is_write);
  note(l1lv, line, r1.hit);
  if (r1.hit) return l1cfg.hit_cycles;

  std::uint32_t latency = l1cfg.hit_cycles + cfg_.l2.hit_cycles;
  const std::uint64_t l2line = l2_.line_of(addr);
  const auto r2 = l2_.access(l2line, false);
  note(Level::l2, l2line, r2.hit);
  if (!r2.hit) latency += cfg_.mem_cycles;
  if (r2.dirty_victim) ++stats_.l2.writebacks;

  if (r1.dirty_victim) {
    ++l1stats.writebacks;
    const std::uint64_t victim_byte = *r1.dirty_victim << std::countr_zero(l1cfg.geometry.line_bytes);
    const std::uint64_t wline = l2_.line_of(victim_byte);
    const auto rw = l2_.access(wline, true);
    note(Level::l2, wline, rw.hit);
    if (rw.dirty_victim) ++stats_.l2.writebacks;
  }
  return latency;
}

void CacheHierarchy::reset() {
  l1i_.reset();
  l1d_.reset();
  l2_.reset();
  stats_ = CacheStats{};
  events_.clear();
}

}  // namespace uarch
