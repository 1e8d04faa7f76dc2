#include <algorithm>

#include <fmt/format.h>

#include "kernel_impls.hpp"
#include "uarch/kernels.hpp"

namespace uarch {

namespace {

const std::vector<KernelDescriptor> kKernels = {
    {"dijkstra",
     "all-pairs shortest paths by repeated Dijkstra on a dense graph",
     {{"n_nodes", 32, 1, 256, "graph nodes"}}},
    {"string_search",
     "naive case-insensitive search of several needles in a haystack",
     {{"haystack", 4096, 1, 1 << 20, "haystack length in bytes"},
      {"needle_len", 8, 1, 256, "needle length in bytes"},
      {"n_needles", 16, 1, 1024, "number of needles"}}},
    {"susan_corners",
     "3x3 brightness-similarity corner response over a grey image",
     {{"width", 64, 1, 1024, "image width in pixels"}, {"height", 64, 1, 1024, "image height in pixels"}}},
    {"flow_class",
     "5-tuple hash into a chained flow table with per-flow counters",
     {{"n_packets", 512, 1, 1 << 18, "packets classified"}, {"n_buckets", 256, 1, 1 << 16, "hash buckets"}}},
    {"ipv4_trie",
     "IPv4 header processing and multibit-trie longest prefix match",
     {{"n_routes", 256, 1, 16384, "routing table entries"},
      {"n_lookups", 1024, 1, 1 << 18, "packets forwarded"},
      {"stride", 4, 1, 8, "trie stride in bits (1, 2, 4 or 8)"}}},
    {"ipsec_aes",
     "AES-128 CBC encryption of a packet payload",
     {{"n_blocks", 64, 1, 1 << 16, "16-byte payload blocks"}}},
};

}  // namespace

std::map<std::string, std::int64_t> KernelDescriptor::defaults() const {
  std::map<std::string, std::int64_t> out;
  for (const auto& p : params) out[p.name] = p.default_value;
  return out;
}

const Region& KernelLayout::region(const std::string& name) const {
  for (const auto& r : regions) {
    if (r.name == name) return r;
  }
  throw std::out_of_range(fmt::format("no region '{}'", name));
}

const std::vector<KernelDescriptor>& list_kernels() { return kKernels; }

const KernelDescriptor& find_kernel(const std::string& name) {
  for (const auto& k : kKernels) {
    if (k.name == name) return k;
  }
  throw KernelError(fmt::format("unknown kernel '{}'", name));
}

KernelSpec resolve_kernel_spec(const KernelSpec& spec) {
  const KernelDescriptor& desc = find_kernel(spec.kernel);
  KernelSpec out = spec;
  out.params = desc.defaults();
  for (const auto& [name, value] : spec.params) {
    auto it = std::find_if(desc.params.begin(), desc.params.end(),
                           [&](const KernelParam& p) { return p.name == name; });
    if (it == desc.params.end()) {
      throw KernelError(fmt::format("kernel '{}' has no parameter '{}'", spec.kernel, name));
    }
    if (value < it->min_value || value > it->max_value) {
      throw KernelError(fmt::format("{}.{} = {} outside [{}, {}]", spec.kernel, name, value, it->min_value,
                                    it->max_value));
    }
    out.params[name] = value;
  }
  if (out.kernel == "string_search" && out.params["needle_len"] > out.params["haystack"]) {
    throw KernelError("string_search.needle_len exceeds haystack");
  }
  if (out.kernel == "ipv4_trie") {
    const auto s = out.params["stride"];
    if (s != 1 && s != 2 && s != 4 && s != 8) throw KernelError("ipv4_trie.stride must be 1, 2, 4 or 8");
  }
  return out;
}

Trace gen_kernel(const KernelSpec& raw, KernelLayout* layout) {
  const KernelSpec spec = resolve_kernel_spec(raw);
  using Gen = Trace (*)(const KernelSpec&, KernelLayout*);
  static const std::map<std::string, Gen> gens = {
      {"dijkstra", kernels::gen_dijkstra},       {"string_search", kernels::gen_string_search},
      {"susan_corners", kernels::gen_susan_corners}, {"flow_class", kernels::gen_flow_class},
      {"ipv4_trie", kernels::gen_ipv4_trie},     {"ipsec_aes", kernels::gen_ipsec_aes},
  };
  return gens.at(spec.kernel)(spec, layout);
}

}  // namespace uarch
