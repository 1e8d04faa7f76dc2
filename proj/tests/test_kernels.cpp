#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "uarch/kernels.hpp"

using namespace uarch;

namespace {

std::size_t loads_in(const Trace& t, const Region& r) {
  return static_cast<std::size_t>(std::count_if(t.records.begin(), t.records.end(), [&](const auto& x) {
    return x.kind == Kind::load && r.contains(*x.addr);
  }));
}

}  // namespace

TEST_CASE("six kernels with unique names and valid defaults") {
  const auto& ks = list_kernels();
  CHECK(ks.size() == 6);
  std::set<std::string> names;
  for (const auto& k : ks) names.insert(k.name);
  CHECK(names == std::set<std::string>{"dijkstra", "string_search", "susan_corners", "flow_class",
                                       "ipv4_trie", "ipsec_aes"});
  for (const auto& k : ks) {
    const KernelSpec s = resolve_kernel_spec({k.name, {}, 1});
    CHECK(s.params == k.defaults());
    for (const auto& p : k.params) {
      CHECK(p.min_value <= p.default_value);
      CHECK(p.default_value <= p.max_value);
    }
  }
  CHECK(find_kernel("dijkstra").params.front().name == "n_nodes");
  CHECK_THROWS_AS(find_kernel("quicksort"), KernelError);
}

TEST_CASE("parameter resolution rejects bad input") {
  CHECK_THROWS_AS(resolve_kernel_spec({"nope", {}, 1}), KernelError);
  CHECK_THROWS_AS(resolve_kernel_spec({"dijkstra", {{"n_nodes", 0}}, 1}), KernelError);
  CHECK_THROWS_AS(resolve_kernel_spec({"dijkstra", {{"n_nodes", 100000}}, 1}), KernelError);
  CHECK_THROWS_AS(resolve_kernel_spec({"dijkstra", {{"nodes", 8}}, 1}), KernelError);
  CHECK_THROWS_AS(resolve_kernel_spec({"string_search", {{"haystack", 4}, {"needle_len", 8}}, 1}),
                  KernelError);
  CHECK_THROWS_AS(resolve_kernel_spec({"ipv4_trie", {{"stride", 3}}, 1}), KernelError);
  CHECK(resolve_kernel_spec({"ipv4_trie", {{"stride", 8}}, 1}).params.at("stride") == 8);
}

TEST_CASE("generation is deterministic and seed sensitive") {
  for (const auto& k : list_kernels()) {
    CAPTURE(k.name);
    const KernelSpec a{k.name, {}, 3};
    const std::string t1 = write_trace_string(gen_kernel(a));
    CHECK(t1 == write_trace_string(gen_kernel(a)));
    const KernelSpec b{k.name, {}, 4};
    CHECK(t1 != write_trace_string(gen_kernel(b)));
  }
  const KernelSpec small{"dijkstra", {{"n_nodes", 4}}, 1};
  CHECK(gen_kernel(small) == gen_kernel(small));
}

TEST_CASE("well-formed traces with one ROI covering most of the run") {
  for (const auto& k : list_kernels()) {
    CAPTURE(k.name);
    KernelLayout layout;
    const Trace t = gen_kernel({k.name, {}, 1}, &layout);
    CHECK(t.name == k.name);
    CHECK(validate_trace(t).empty());
    REQUIRE(t.has_roi());
    CHECK(t.roi_end.has_value());
    CHECK(static_cast<double>(t.roi_size()) >= 0.9 * static_cast<double>(t.records.size()));

    const std::string text = write_trace_string(t);
    std::size_t begins = 0, ends = 0, pos = 0;
    while ((pos = text.find("ROI BEGIN", pos)) != std::string::npos) ++begins, ++pos;
    pos = 0;
    while ((pos = text.find("ROI END", pos)) != std::string::npos) ++ends, ++pos;
    CHECK(begins == 1);
    CHECK(ends == 1);

    // Each static instruction keeps one kind.
    std::map<std::uint32_t, Kind> kinds;
    for (const auto& r : t.records) {
      auto [it, fresh] = kinds.emplace(r.sid, r.kind);
      if (!fresh && it->second != r.kind) FAIL_CHECK("sid " << r.sid << " changes kind");
    }
    CHECK(kinds.size() < t.records.size());

    // Regions are disjoint and every data access lands in one of them.
    auto regions = layout.regions;
    REQUIRE(regions.size() >= 2);
    std::sort(regions.begin(), regions.end(), [](auto& a, auto& b) { return a.base < b.base; });
    for (std::size_t i = 1; i < regions.size(); ++i) CHECK(regions[i - 1].end() <= regions[i].base);
    std::size_t stray = 0;
    for (const auto& r : t.records) {
      if (!r.is_mem()) continue;
      const bool inside = std::any_of(regions.begin(), regions.end(), [&](const Region& g) {
        return g.contains(*r.addr) && g.contains(*r.addr + *r.size - 1);
      });
      stray += inside ? 0 : 1;
    }
    CHECK(stray == 0);
    // Accesses never cross a 32-byte line.
    for (const auto& r : t.records) {
      if (r.is_mem()) CHECK(*r.addr / 32 == (*r.addr + *r.size - 1) / 32);
    }
  }
}

TEST_CASE("dijkstra relax compare depends on a distance load") {
  KernelLayout layout;
  const Trace t = gen_kernel({"dijkstra", {{"n_nodes", 12}}, 2}, &layout);
  const Region dist = layout.region("dist");
  const auto dep = oracle::depends_on_load(t, [&](std::uint64_t a) { return dist.contains(a); });
  std::size_t dependent_branches = 0;
  std::set<std::uint32_t> sids;
  for (std::size_t i = *t.roi_begin; i < *t.roi_end; ++i) {
    if (t.records[i].kind == Kind::branch && dep[i]) {
      ++dependent_branches;
      sids.insert(t.records[i].sid);
    }
  }
  // At least the min-search and the relax compares.
  CHECK(sids.size() >= 2);
  CHECK(dependent_branches >= 12 * 11);
  CHECK(loads_in(t, dist) > 0);
}

TEST_CASE("string_search reads the haystack like a naive scan") {
  const std::int64_t H = 600, K = 5;
  const KernelSpec spec{"string_search", {{"haystack", H}, {"needle_len", K}, {"n_needles", 1}}, 9};
  KernelLayout layout;
  const Trace t = gen_kernel(spec, &layout);
  const auto in = kernels::string_search_input(spec);
  REQUIRE(in.haystack.size() == static_cast<std::size_t>(H));
  REQUIRE(in.needles.size() == 1);
  const std::size_t hay_loads = loads_in(t, layout.region("haystack"));
  CHECK(hay_loads >= static_cast<std::size_t>(H - K + 1));

  // Early-exit comparison count per alignment.
  std::size_t compares = 0;
  const std::string& n = in.needles[0];
  for (std::size_t i = 0; i + n.size() <= in.haystack.size(); ++i) {
    std::size_t j = 0;
    while (j < n.size() && std::tolower(static_cast<unsigned char>(in.haystack[i + j])) ==
                               std::tolower(static_cast<unsigned char>(n[j]))) {
      ++j;
    }
    compares += std::min(j + 1, n.size());
  }
  CHECK(hay_loads == compares);
  CHECK_FALSE(oracle::naive_find_all(in.haystack, n).empty());
}

TEST_CASE("AES-128 reference matches the standard test vector") {
  kernels::AesKey key;
  kernels::AesBlock pt;
  for (int i = 0; i < 16; ++i) {
    key[i] = static_cast<std::uint8_t>(i);
    pt[i] = static_cast<std::uint8_t>(i * 0x11);
  }
  const kernels::AesBlock expect{0x69, 0xc4, 0xe0, 0xd8, 0x6a, 0x7b, 0x04, 0x30,
                                 0xd8, 0xcd, 0xb7, 0x80, 0x70, 0xb4, 0xc5, 0x5a};
  CHECK(kernels::aes128_encrypt_block(key, pt) == expect);
  const auto rk = kernels::aes128_expand_key(key);
  CHECK(rk[16] == 0xd6);
  CHECK(rk[175] == 0xc5);
}

TEST_CASE("ipsec_aes does one S-box load per state byte per round") {
  KernelLayout layout;
  const Trace t = gen_kernel({"ipsec_aes", {{"n_blocks", 2}}, 1}, &layout);
  CHECK(loads_in(t, layout.region("sbox")) == 2 * 10 * 16);
  CHECK(loads_in(t, layout.region("round_keys")) == 2 * 11 * 16);
}

TEST_CASE("size parameters scale the dynamic work") {
  const auto n_small = gen_kernel({"flow_class", {{"n_packets", 64}}, 1}).records.size();
  const auto n_large = gen_kernel({"flow_class", {{"n_packets", 256}}, 1}).records.size();
  CHECK(n_large > 3 * n_small);
  const auto s4 = gen_kernel({"ipv4_trie", {{"stride", 4}}, 1}).roi_size();
  const auto s8 = gen_kernel({"ipv4_trie", {{"stride", 8}}, 1}).roi_size();
  CHECK(s8 < s4);
}
