// Flow classification: hash each packet's 5-tuple (FNV-1a over 13 bytes)
// into a chained hash table of per-flow records and update the flow's
// counters, inserting a new record on first sight.

#include <vector>

#include "emitter.hpp"
#include "kernel_impls.hpp"

namespace uarch::kernels {

namespace {

constexpr std::uint64_t kPacketSlot = 64;
constexpr std::uint64_t kFlowRecord = 64;
constexpr std::uint32_t kFnvOffset = 2166136261u;
constexpr std::uint32_t kFnvPrime = 16777619u;

// Byte offsets inside an IPv4 + L4 header.
constexpr std::uint64_t kOffLen = 2;
constexpr std::uint64_t kOffProto = 9;
constexpr std::uint64_t kOffSrc = 12;
constexpr std::uint64_t kOffDst = 16;
constexpr std::uint64_t kOffPorts = 20;

// Flow record layout.
constexpr std::uint64_t kRecHash = 0;
constexpr std::uint64_t kRecKeyA = 8;
constexpr std::uint64_t kRecKeyB = 16;
constexpr std::uint64_t kRecNext = 24;
constexpr std::uint64_t kRecPackets = 32;
constexpr std::uint64_t kRecBytes = 40;
constexpr std::uint64_t kRecLastSeen = 48;

struct Tuple {
  std::uint8_t bytes[13];  // src(4) dst(4) sport(2) dport(2) proto(1)
  bool operator==(const Tuple& o) const {
    for (int i = 0; i < 13; ++i) {
      if (bytes[i] != o.bytes[i]) return false;
    }
    return true;
  }
};

std::uint32_t fnv1a(const Tuple& t) {
  std::uint32_t h = kFnvOffset;
  for (auto b : t.bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

// Header offset of each hashed tuple byte.
std::uint64_t tuple_offset(int i) {
  if (i < 4) return kOffSrc + static_cast<std::uint64_t>(i);
  if (i < 8) return kOffDst + static_cast<std::uint64_t>(i - 4);
  if (i < 12) return kOffPorts + static_cast<std::uint64_t>(i - 8);
  return kOffProto;
}

}  // namespace

Trace gen_flow_class(const KernelSpec& spec, KernelLayout* layout) {
  const auto n_packets = static_cast<std::uint64_t>(spec.params.at("n_packets"));
  const auto n_buckets = static_cast<std::uint64_t>(spec.params.at("n_buckets"));
  std::mt19937_64 rng(spec.seed);

  const std::uint64_t n_flows = std::max<std::uint64_t>(1, n_packets / 2);
  std::vector<Tuple> flows(n_flows);
  for (auto& f : flows) {
    for (auto& b : f.bytes) b = static_cast<std::uint8_t>(draw(rng, 256));
    f.bytes[12] = draw(rng, 4) == 0 ? 17 : 6;
  }
  std::vector<std::uint64_t> pkt_flow(n_packets);
  for (auto& f : pkt_flow) f = draw(rng, n_flows);

  AddressMap mem;
  const Region pkt_r = mem.alloc("packets", n_packets * kPacketSlot);
  const Region bucket_r = mem.alloc("buckets", n_buckets * 8);
  const Region pool_r = mem.alloc("flow_records", n_flows * kFlowRecord);

  Emitter em("flow_class");
  const Sid s_bk_st = em.site(), s_bk_inc = em.site(), s_bk_loop = em.site();
  const Sid s_pkt = em.site(), s_h_init = em.site();
  const Sid s_h_ld = em.site(), s_h_xor = em.site(), s_h_mul = em.site();
  const Sid s_mod = em.site(), s_b_addr = em.site(), s_b_ld = em.site();
  const Sid s_w_null = em.site(), s_w_hash = em.site(), s_w_hcmp = em.site(), s_w_hbr = em.site(),
            s_w_ka = em.site(), s_w_pa = em.site(), s_w_kb = em.site(), s_w_pb = em.site(),
            s_w_kcmp = em.site(), s_w_kbr = em.site(), s_w_next = em.site();
  const Sid s_u_pk = em.site(), s_u_pk_inc = em.site(), s_u_pk_st = em.site(),
            s_u_len = em.site(), s_u_by = em.site(), s_u_by_add = em.site(), s_u_by_st = em.site(),
            s_u_ts = em.site(), s_u_ts_st = em.site();
  const Sid s_n_addr = em.site(), s_n_bump = em.site(), s_n_hash = em.site(), s_n_ka = em.site(),
            s_n_ka_st = em.site(), s_n_kb = em.site(), s_n_kb_st = em.site(), s_n_next = em.site(),
            s_n_one = em.site(), s_n_pk = em.site(), s_n_len = em.site(), s_n_by = em.site(),
            s_n_ts = em.site(), s_n_ts_st = em.site(), s_n_next_st = em.site(),
            s_n_head = em.site(), s_clk_init = em.site();
  const Sid s_p_inc = em.site(), s_p_loop = em.site();

  Reg i_reg = em.pin();
  Reg pkt = em.pin();
  Reg hash = em.pin();
  Reg node = em.pin();
  Reg pool = em.pin();
  Reg clock = em.pin();
  Reg ba = em.pin();

  // Zero the bucket heads.
  em.alu_into(s_bk_inc, i_reg, em.zero());
  for (std::uint64_t b = 0; b < n_buckets; ++b) {
    em.store(s_bk_st, em.zero(), i_reg, bucket_r.base + b * 8, 8);
    em.alu_into(s_bk_inc, i_reg, i_reg);
    em.branch(s_bk_loop, i_reg, b + 1 < n_buckets);
  }
  em.alu_into(s_n_bump, pool, em.zero());
  em.alu_into(s_p_inc, i_reg, em.zero());
  em.alu_into(s_clk_init, clock, em.zero());

  struct Record {
    std::uint64_t flow;
    std::uint64_t addr;
    std::uint64_t next;  // record index + 1, 0 = null
  };
  std::vector<Record> records;
  std::vector<std::uint64_t> heads(n_buckets, 0);

  em.roi_begin();
  for (std::uint64_t p = 0; p < n_packets; ++p) {
    const Tuple& t = flows[pkt_flow[p]];
    const std::uint64_t base = pkt_r.base + p * kPacketSlot;
    em.alu_into(s_pkt, pkt, i_reg);

    em.alu_into(s_h_init, hash, em.zero());
    for (int b = 0; b < 13; ++b) {
      Reg v = em.load(s_h_ld, pkt, base + tuple_offset(b), 1);
      em.alu_into(s_h_xor, hash, hash, v);
      em.mul_into(s_h_mul, hash, hash);
    }
    const std::uint32_t h = fnv1a(t);
    const std::uint64_t bucket = h % n_buckets;
    Reg idx = em.div(s_mod, hash);
    em.alu_into(s_b_addr, ba, idx);
    em.load_into(s_b_ld, node, ba, bucket_r.base + bucket * 8, 8);

    std::uint64_t cur = heads[bucket];
    bool found = false;
    while (true) {
      em.branch(s_w_null, node, cur == 0);
      if (cur == 0) break;
      const Record& rec = records[cur - 1];
      const Tuple& other = flows[rec.flow];
      Reg rh = em.load(s_w_hash, node, rec.addr + kRecHash, 4);
      Reg c = em.alu(s_w_hcmp, rh, hash);
      const bool hash_eq = fnv1a(other) == h;
      em.branch(s_w_hbr, c, !hash_eq);
      if (hash_eq) {
        Reg ka = em.load(s_w_ka, node, rec.addr + kRecKeyA, 8);
        Reg pa = em.load(s_w_pa, pkt, base + kOffSrc, 8);
        Reg kb = em.load(s_w_kb, node, rec.addr + kRecKeyB, 8);
        Reg pb = em.load(s_w_pb, pkt, base + kOffPorts, 8);
        Reg x = em.alu(s_w_kcmp, ka, pa);
        Reg y = em.alu(s_w_kcmp, kb, pb);
        Reg z = em.alu(s_w_kcmp, x, y);
        const bool key_eq = other == t;
        em.branch(s_w_kbr, z, key_eq);
        if (key_eq) {
          found = true;
          Reg pk = em.load(s_u_pk, node, rec.addr + kRecPackets, 8);
          Reg pk1 = em.alu(s_u_pk_inc, pk);
          em.store(s_u_pk_st, pk1, node, rec.addr + kRecPackets, 8);
          Reg len = em.load(s_u_len, pkt, base + kOffLen, 2);
          Reg by = em.load(s_u_by, node, rec.addr + kRecBytes, 8);
          Reg by1 = em.alu(s_u_by_add, by, len);
          em.store(s_u_by_st, by1, node, rec.addr + kRecBytes, 8);
          em.alu_into(s_u_ts, clock, clock);
          em.store(s_u_ts_st, clock, node, rec.addr + kRecLastSeen, 8);
          break;
        }
      }
      em.load_into(s_w_next, node, node, rec.addr + kRecNext, 8);
      cur = rec.next;
    }

    if (!found) {
      const std::uint64_t addr = pool_r.base + records.size() * kFlowRecord;
      Reg na = em.alu(s_n_addr, pool);
      em.alu_into(s_n_bump, pool, pool);
      em.store(s_n_hash, hash, na, addr + kRecHash, 4);
      Reg ka = em.load(s_n_ka, pkt, base + kOffSrc, 8);
      em.store(s_n_ka_st, ka, na, addr + kRecKeyA, 8);
      Reg kb = em.load(s_n_kb, pkt, base + kOffPorts, 8);
      em.store(s_n_kb_st, kb, na, addr + kRecKeyB, 8);
      Reg head = em.load(s_n_next, ba, bucket_r.base + bucket * 8, 8);
      em.store(s_n_next_st, head, na, addr + kRecNext, 8);
      Reg one = em.alu(s_n_one, em.zero());
      em.store(s_n_pk, one, na, addr + kRecPackets, 8);
      Reg len = em.load(s_n_len, pkt, base + kOffLen, 2);
      em.store(s_n_by, len, na, addr + kRecBytes, 8);
      em.alu_into(s_n_ts, clock, clock);
      em.store(s_n_ts_st, clock, na, addr + kRecLastSeen, 8);
      em.store(s_n_head, na, ba, bucket_r.base + bucket * 8, 8);
      records.push_back({pkt_flow[p], addr, heads[bucket]});
      heads[bucket] = records.size();
    }

    em.alu_into(s_p_inc, i_reg, i_reg);
    em.branch(s_p_loop, i_reg, p + 1 < n_packets);
  }
  em.roi_end();

  if (layout) *layout = mem.layout();
  return em.finish();
}

}  // namespace uarch::kernels
