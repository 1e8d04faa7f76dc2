// IPv4 forwarding: RFC 1812 header checks (TTL, incremental checksum) and a
// longest-prefix-match lookup in a fixed-stride multibit trie built with
// prefix expansion.

#include <algorithm>
#include <iterator>
#include <vector>

#include "emitter.hpp"
#include "kernel_impls.hpp"

namespace uarch::kernels {

namespace {

constexpr std::uint64_t kPacketSlot = 32;
constexpr std::uint64_t kEntryBytes = 8;  // {child node index, next hop}
constexpr std::uint64_t kOffTtl = 8;
constexpr std::uint64_t kOffCsum = 10;
constexpr std::uint64_t kOffDst = 16;

struct Route {
  std::uint32_t prefix;
  int len;
  std::uint32_t nexthop;
};

struct Entry {
  std::uint32_t child = 0;    // node index, 0 = none (root is never a child)
  std::uint32_t nexthop = 0;  // 0 = no route
};

class Trie {
 public:
  explicit Trie(int stride) : stride_(stride), fanout_(1u << stride) { nodes_.resize(fanout_); }

  void insert(const Route& r) {
    std::uint32_t node = 0;
    int consumed = 0;
    while (r.len - consumed > stride_) {
      Entry& e = at(node, chunk(r.prefix, consumed));
      if (e.child == 0) {
        e.child = static_cast<std::uint32_t>(nodes_.size() / fanout_);
        nodes_.resize(nodes_.size() + fanout_);
      }
      node = at(node, chunk(r.prefix, consumed)).child;
      consumed += stride_;
    }
    // Expand the remaining bits over every covered slot of this node.
    const int rest = r.len - consumed;
    const std::uint32_t first = rest == 0 ? 0 : chunk(r.prefix, consumed) & ~((1u << (stride_ - rest)) - 1);
    const std::uint32_t span = 1u << (stride_ - rest);
    for (std::uint32_t i = 0; i < span; ++i) at(node, first + i).nexthop = r.nexthop;
  }

  std::uint32_t chunk(std::uint32_t addr, int consumed) const {
    return (addr >> (32 - consumed - stride_)) & (fanout_ - 1);
  }
  Entry& at(std::uint32_t node, std::uint32_t idx) { return nodes_[node * fanout_ + idx]; }
  const Entry& at(std::uint32_t node, std::uint32_t idx) const { return nodes_[node * fanout_ + idx]; }
  std::size_t entries() const { return nodes_.size(); }
  int stride() const { return stride_; }

 private:
  int stride_;
  std::uint32_t fanout_;
  std::vector<Entry> nodes_;
};

std::uint32_t mask_prefix(std::uint32_t addr, int len) {
  return len == 0 ? 0 : addr & ~((len == 32 ? 0u : (0xffffffffu >> len)));
}

}  // namespace

Trace gen_ipv4_trie(const KernelSpec& spec, KernelLayout* layout) {
  const auto n_routes = static_cast<std::uint64_t>(spec.params.at("n_routes"));
  const auto n_lookups = static_cast<std::uint64_t>(spec.params.at("n_lookups"));
  const int stride = static_cast<int>(spec.params.at("stride"));
  std::mt19937_64 rng(spec.seed);

  // Routes cluster under a handful of first octets, like a real table.
  static constexpr int kLens[] = {8, 12, 16, 16, 20, 24, 24, 24, 28, 32};
  std::vector<std::uint32_t> octets(8);
  for (auto& o : octets) o = static_cast<std::uint32_t>(1 + draw(rng, 223));
  std::vector<Route> routes(n_routes);
  for (std::uint64_t i = 0; i < n_routes; ++i) {
    const int len = kLens[draw(rng, std::size(kLens))];
    const std::uint32_t addr = (octets[draw(rng, octets.size())] << 24) | static_cast<std::uint32_t>(draw(rng, 1u << 24));
    routes[i] = {mask_prefix(addr, len), len, static_cast<std::uint32_t>(1 + i)};
  }
  // Shorter prefixes first so expansion of a longer one overrides them.
  std::stable_sort(routes.begin(), routes.end(), [](const Route& a, const Route& b) { return a.len < b.len; });
  Trie trie(stride);
  for (const auto& r : routes) trie.insert(r);

  struct Packet {
    std::uint32_t dst;
    std::uint8_t ttl;
  };
  std::vector<Packet> packets(n_lookups);
  for (auto& p : packets) {
    if (draw(rng, 10) < 8) {
      const Route& r = routes[draw(rng, routes.size())];
      const std::uint32_t host = static_cast<std::uint32_t>(rng()) & (r.len == 32 ? 0u : 0xffffffffu >> r.len);
      p.dst = r.prefix | host;
    } else {
      p.dst = static_cast<std::uint32_t>(rng());
    }
    p.ttl = static_cast<std::uint8_t>(draw(rng, 50) == 0 ? 1 : 2 + draw(rng, 62));
  }

  AddressMap mem;
  const Region trie_r = mem.alloc("trie", trie.entries() * kEntryBytes);
  const Region pkt_r = mem.alloc("packets", n_lookups * kPacketSlot);
  const Region out_r = mem.alloc("next_hops", n_lookups * 4);

  Emitter em("ipv4_trie");
  const Sid s_b_cval = em.site(), s_b_cst = em.site(), s_b_hval = em.site(), s_b_hst = em.site();
  const Sid s_i_init = em.site();
  const Sid s_pkt = em.site(), s_ttl = em.site(), s_ttl_cmp = em.site(), s_ttl_br = em.site(),
            s_ttl_dec = em.site(), s_ttl_st = em.site(), s_cs = em.site(), s_cs_add = em.site(),
            s_cs_fold = em.site(), s_cs_st = em.site(), s_dst = em.site();
  const Sid s_w_root = em.site(), s_w_best = em.site(), s_w_idx = em.site(), s_w_ent = em.site(),
            s_w_nh = em.site(), s_w_nhbr = em.site(), s_w_take = em.site(), s_w_child = em.site(),
            s_w_cbr = em.site(), s_w_step = em.site();
  const Sid s_res_st = em.site(), s_p_inc = em.site(), s_p_loop = em.site();

  Reg i_reg = em.pin();
  Reg pkt = em.pin();
  Reg dst = em.pin();
  Reg node = em.pin();
  Reg best = em.pin();

  // Trie construction writes every populated entry.
  for (std::size_t e = 0; e < trie.entries(); ++e) {
    const Entry& ent = trie.at(0, static_cast<std::uint32_t>(e));
    const std::uint64_t a = trie_r.base + e * kEntryBytes;
    if (ent.child != 0) {
      Reg v = em.alu(s_b_cval, em.zero());
      em.store(s_b_cst, v, em.zero(), a, 4);
    }
    if (ent.nexthop != 0) {
      Reg v = em.alu(s_b_hval, em.zero());
      em.store(s_b_hst, v, em.zero(), a + 4, 4);
    }
  }
  em.alu_into(s_i_init, i_reg, em.zero());

  const std::uint32_t fanout = 1u << stride;
  em.roi_begin();
  for (std::uint64_t p = 0; p < n_lookups; ++p) {
    const Packet& pk = packets[p];
    const std::uint64_t base = pkt_r.base + p * kPacketSlot;
    em.alu_into(s_pkt, pkt, i_reg);

    Reg ttl = em.load(s_ttl, pkt, base + kOffTtl, 1);
    Reg c = em.alu(s_ttl_cmp, ttl);
    const bool expired = pk.ttl <= 1;
    em.branch(s_ttl_br, c, expired);
    if (!expired) {
      Reg t1 = em.alu(s_ttl_dec, ttl);
      em.store(s_ttl_st, t1, pkt, base + kOffTtl, 1);
      Reg cs = em.load(s_cs, pkt, base + kOffCsum, 2);
      Reg cs1 = em.alu(s_cs_add, cs);
      Reg cs2 = em.alu(s_cs_fold, cs1);
      em.store(s_cs_st, cs2, pkt, base + kOffCsum, 2);
      em.load_into(s_dst, dst, pkt, base + kOffDst, 4);

      em.alu_into(s_w_root, node, em.zero());
      em.alu_into(s_w_best, best, em.zero());
      std::uint32_t cur = 0;
      for (int consumed = 0; consumed < 32; consumed += stride) {
        const std::uint32_t idx = trie.chunk(pk.dst, consumed);
        const Entry& ent = trie.at(cur, idx);
        const std::uint64_t a = trie_r.base + (std::uint64_t{cur} * fanout + idx) * kEntryBytes;
        Reg ix = em.alu(s_w_idx, dst);
        Reg ea = em.alu(s_w_ent, node, ix);
        Reg h = em.load(s_w_nh, ea, a + 4, 4);
        em.branch(s_w_nhbr, h, ent.nexthop == 0);
        if (ent.nexthop != 0) {
          em.alu_into(s_w_take, best, h);
        }
        Reg ch = em.load(s_w_child, ea, a, 4);
        em.branch(s_w_cbr, ch, ent.child == 0);
        if (ent.child == 0) break;
        em.alu_into(s_w_step, node, ch);
        cur = ent.child;
      }
      em.store(s_res_st, best, i_reg, out_r.base + p * 4, 4);
    }

    em.alu_into(s_p_inc, i_reg, i_reg);
    em.branch(s_p_loop, i_reg, p + 1 < n_lookups);
  }
  em.roi_end();

  if (layout) *layout = mem.layout();
  return em.finish();
}

}  // namespace uarch::kernels
