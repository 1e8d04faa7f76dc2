#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "props.hpp"
#include "uarch/cachesim.hpp"
#include "uarch/kernels.hpp"

using namespace uarch;

namespace {

HierarchyConfig small_hierarchy() {
  HierarchyConfig h;
  h.l1i.geometry = {2048, 32, 2, 1, 1, 90, AccessType::fast, 350.0};
  h.l1d.geometry = {1024, 32, 4, 1, 1, 90, AccessType::fast, 350.0};
  h.l2.geometry = {8192, 64, 4, 1, 1, 90, AccessType::normal_serial, 350.0};
  h.l1i.hit_cycles = 1;
  h.l1d.hit_cycles = 2;
  h.l2.hit_cycles = 5;
  h.mem_cycles = 40;
  return h;
}

bool all_zero(const CacheStats& s) { return s == CacheStats{}; }

}  // namespace

TEST_CASE("latency by level on the cold and warm paths") {
  const HierarchyConfig h = small_hierarchy();
  CacheHierarchy c(h);
  CHECK(all_zero(c.stats()));
  CHECK(c.access(0x1000, 4, false, Port::data) == 2 + 5 + 40);
  CHECK(c.access(0x1000, 4, false, Port::data) == 2);
  CHECK(c.access(0x1004, 4, true, Port::data) == 2);
  // Same L2 line, other L1 line: L1 miss, L2 hit.
  CHECK(c.access(0x1020, 4, false, Port::data) == 2 + 5);
  // The instruction port has its own L1 but shares L2.
  CHECK(c.access(0x1000, 4, false, Port::ifetch) == 1 + 5);
  CHECK(c.access(0x1000, 4, false, Port::ifetch) == 1);
  CHECK(c.stats().l1d.accesses == 4);
  CHECK(c.stats().l1i.accesses == 2);
  CHECK(c.stats().l2.accesses == 3);
  CHECK(c.stats().l2.misses == 1);
}

TEST_CASE("round robin over ways+1 lines of one set thrashes") {
  const HierarchyConfig h = small_hierarchy();
  CacheHierarchy c(h);
  const std::uint64_t stride = h.l1d.geometry.sets() * h.l1d.geometry.line_bytes;
  const std::uint32_t n = h.l1d.geometry.associativity + 1;
  for (int round = 0; round < 10; ++round) {
    for (std::uint32_t i = 0; i < n; ++i) c.access(i * stride, 4, false, Port::data);
  }
  CHECK(c.stats().l1d.hits == 0);
  CHECK(c.stats().l1d.misses == 10 * n);

  CacheArray a(h.l1d.geometry);
  std::vector<std::pair<std::uint64_t, bool>> s;
  for (int round = 0; round < 10; ++round) {
    for (std::uint32_t i = 0; i < n; ++i) s.emplace_back(i * stride, false);
  }
  oracle::RefCache ref(h.l1d.geometry.capacity_bytes, 32, h.l1d.geometry.associativity);
  for (const auto& [addr, w] : s) CHECK_FALSE(ref.access(ref.line_of(addr), w).hit);
}

TEST_CASE("matches the naive reference on random access strings") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const HierarchyConfig h = small_hierarchy();
    CacheHierarchy fast(h);
    oracle::RefHierarchy ref(h);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> addr(0, 64 * 1024 - 1);
    std::uniform_int_distribution<int> coin(0, 3);
    for (int i = 0; i < 20000; ++i) {
      const auto a = addr(rng) & ~std::uint64_t{3};
      const int k = coin(rng);
      const Port p = k == 0 ? Port::ifetch : Port::data;
      const bool w = p == Port::data && k == 3;
      REQUIRE(fast.access(a, 4, w, p) == ref.access(a, w, p));
    }
    CHECK(fast.stats() == ref.stats);
    CHECK(fast.stats().l1d.writebacks > 0);
    CHECK(fast.stats().l2.writebacks > 0);
  }
}

TEST_CASE("bookkeeping identities") {
  const HierarchyConfig h = small_hierarchy();
  CacheHierarchy c(h);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5000; ++i) c.access((rng() % 32768) & ~7ull, 8, rng() % 2, Port::data);
  for (const auto* s : {&c.stats().l1i, &c.stats().l1d, &c.stats().l2}) {
    CHECK(s->hits + s->misses == s->accesses);
    CHECK(s->writebacks <= s->misses);
    CHECK(s->miss_rate() >= 0.0);
    CHECK(s->miss_rate() <= 1.0);
  }
}

TEST_CASE("reset returns to the cold state") {
  const HierarchyConfig h = small_hierarchy();
  CacheHierarchy c(h);
  c.access(0x40, 4, true, Port::data);
  c.access(0x40, 4, false, Port::data);
  c.reset();
  CHECK(all_zero(c.stats()));
  c.reset();
  CHECK(all_zero(c.stats()));
  CHECK(c.access(0x40, 4, false, Port::data) == 2 + 5 + 40);
}

TEST_CASE("perfect hierarchy always hits") {
  HierarchyConfig h = small_hierarchy();
  h.perfect = true;
  CacheHierarchy c(h);
  for (std::uint64_t a = 0; a < 1 << 20; a += 4096) CHECK(c.access(a, 4, false, Port::data) == 2);
  CHECK(c.stats().l1d.misses == 0);
  CHECK(c.stats().l2.accesses == 0);
}

TEST_CASE("hierarchy validation") {
  HierarchyConfig h = small_hierarchy();
  h.l2.geometry.capacity_bytes = 512;
  h.l2.geometry.associativity = 1;
  CHECK_THROWS_AS(check_hierarchy(h), std::invalid_argument);
  h = small_hierarchy();
  h.mem_cycles = 0;
  CHECK_THROWS_AS(check_hierarchy(h), std::invalid_argument);
  h = small_hierarchy();
  h.l1d.hit_cycles = 0;
  CHECK_THROWS_AS(check_hierarchy(h), std::invalid_argument);
}

TEST_CASE("LRU inclusion on a kernel trace") {
  KernelSpec spec{"flow_class", {{"n_packets", 128}}, 3};
  const Trace t = gen_kernel(spec);
  CacheGeometry g{1024, 32, 2, 1, 1, 90, AccessType::fast, 350.0};
  CHECK(props::check_inclusion(props::access_string(t, Port::data), g) == "");
  CHECK(props::check_inclusion(props::access_string(t, Port::ifetch), g) == "");
  CHECK(props::check_l2_inclusion(t, small_hierarchy()) == "");
}
