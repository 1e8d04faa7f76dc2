// ESP-style payload encryption: AES-128 in CBC mode over a packet payload,
// encrypting in place. Table-driven SubBytes with one S-box load per byte.

#include <vector>

#include "emitter.hpp"
#include "kernel_impls.hpp"

namespace uarch::kernels {

namespace {

constexpr int kRounds = 10;

std::uint8_t xtime(std::uint8_t a) {
  return static_cast<std::uint8_t>((a << 1) ^ ((a >> 7) * 0x1b));
}

std::uint8_t gmul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t p = 0;
  for (; b; b >>= 1) {
    if (b & 1) p ^= a;
    a = xtime(a);
  }
  return p;
}

std::array<std::uint8_t, 256> make_sbox() {
  std::array<std::uint8_t, 256> box{};
  for (int x = 0; x < 256; ++x) {
    std::uint8_t inv = 0;
    if (x != 0) {
      for (int y = 1; y < 256; ++y) {
        if (gmul(static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)) == 1) {
          inv = static_cast<std::uint8_t>(y);
          break;
        }
      }
    }
    std::uint8_t s = inv;
    for (int r = 1; r <= 4; ++r) s ^= static_cast<std::uint8_t>((inv << r) | (inv >> (8 - r)));
    box[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(s ^ 0x63);
  }
  return box;
}

const std::array<std::uint8_t, 256>& sbox() {
  static const auto box = make_sbox();
  return box;
}

using State = std::array<std::uint8_t, 16>;  // column-major, byte r of column c at r + 4c

void add_round_key(State& s, const std::uint8_t* rk) {
  for (int i = 0; i < 16; ++i) s[i] ^= rk[i];
}

void sub_bytes(State& s) {
  for (auto& b : s) b = sbox()[b];
}

template <typename T>
void shift_rows(std::array<T, 16>& s) {
  const auto old = s;
  for (int r = 1; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) s[r + 4 * c] = old[r + 4 * ((c + r) % 4)];
  }
}

void mix_columns(State& s) {
  for (int c = 0; c < 4; ++c) {
    std::uint8_t* a = &s[4 * c];
    const std::uint8_t t = a[0] ^ a[1] ^ a[2] ^ a[3];
    const std::uint8_t a0 = a[0];
    for (int j = 0; j < 4; ++j) {
      const std::uint8_t next = j == 3 ? a0 : a[j + 1];
      a[j] = a[j] ^ t ^ xtime(a[j] ^ next);
    }
  }
}

std::array<Sid, 16> sites(Emitter& em) {
  std::array<Sid, 16> s{};
  for (auto& x : s) x = em.site();
  return s;
}

}  // namespace

std::array<std::uint8_t, 176> aes128_expand_key(const AesKey& key) {
  std::array<std::uint8_t, 176> w{};
  std::copy(key.begin(), key.end(), w.begin());
  std::uint8_t rcon = 1;
  for (int i = 4; i < 44; ++i) {
    std::uint8_t t[4] = {w[4 * i - 4], w[4 * i - 3], w[4 * i - 2], w[4 * i - 1]};
    if (i % 4 == 0) {
      const std::uint8_t t0 = t[0];
      t[0] = static_cast<std::uint8_t>(sbox()[t[1]] ^ rcon);
      t[1] = sbox()[t[2]];
      t[2] = sbox()[t[3]];
      t[3] = sbox()[t0];
      rcon = xtime(rcon);
    }
    for (int j = 0; j < 4; ++j) w[4 * i + j] = static_cast<std::uint8_t>(w[4 * (i - 4) + j] ^ t[j]);
  }
  return w;
}

AesBlock aes128_encrypt_block(const AesKey& key, const AesBlock& plaintext) {
  const auto rk = aes128_expand_key(key);
  State s = plaintext;
  add_round_key(s, rk.data());
  for (int round = 1; round <= kRounds; ++round) {
    sub_bytes(s);
    shift_rows(s);
    if (round != kRounds) mix_columns(s);
    add_round_key(s, rk.data() + 16 * round);
  }
  return s;
}

Trace gen_ipsec_aes(const KernelSpec& spec, KernelLayout* layout) {
  const auto n_blocks = static_cast<std::uint64_t>(spec.params.at("n_blocks"));
  std::mt19937_64 rng(spec.seed);

  AesKey key{};
  for (auto& b : key) b = static_cast<std::uint8_t>(draw(rng, 256));
  State iv{};
  for (auto& b : iv) b = static_cast<std::uint8_t>(draw(rng, 256));
  std::vector<std::uint8_t> payload(n_blocks * 16);
  for (auto& b : payload) b = static_cast<std::uint8_t>(draw(rng, 256));
  const auto rk = aes128_expand_key(key);

  AddressMap mem;
  const Region sbox_r = mem.alloc("sbox", 256);
  const Region rk_r = mem.alloc("round_keys", 176);
  const Region iv_r = mem.alloc("iv", 16);
  const Region pay_r = mem.alloc("payload", n_blocks * 16);

  Emitter em("ipsec_aes");
  const Sid s_key_v = em.site(), s_key_st = em.site(), s_blk_init = em.site();
  const auto s_iv = sites(em);
  const auto s_cbc_ld = sites(em), s_cbc_x = sites(em);
  const Sid s_rk_init = em.site();
  const auto s_ark0_ld = sites(em), s_ark0_x = sites(em);
  const auto s_sub = sites(em);
  std::array<Sid, 4> s_t0{}, s_t1{}, s_t2{};
  for (int c = 0; c < 4; ++c) {
    s_t0[c] = em.site();
    s_t1[c] = em.site();
    s_t2[c] = em.site();
  }
  const auto s_mx_u = sites(em), s_mx_h = sites(em), s_mx_m = sites(em), s_mx_x = sites(em),
             s_mx_t = sites(em), s_mx_a = sites(em), s_mx_mv = sites(em);
  const Sid s_rk_inc = em.site();
  const auto s_ark_ld = sites(em), s_ark_x = sites(em);
  const Sid s_r_loop = em.site();
  const auto s_out = sites(em);
  const Sid s_blk_inc = em.site(), s_blk_loop = em.site();

  std::array<Reg, 16> st;
  for (auto& r : st) r = em.pin();
  Reg blk = em.pin();
  Reg rkp = em.pin();

  // Key schedule output written once per session.
  for (int w = 0; w < 44; ++w) {
    Reg v = em.alu(s_key_v, em.zero());
    em.store(s_key_st, v, em.zero(), rk_r.base + static_cast<std::uint64_t>(w) * 4, 4);
  }
  em.alu_into(s_blk_init, blk, em.zero());

  em.roi_begin();
  State s = iv;
  for (int i = 0; i < 16; ++i) em.load_into(s_iv[i], st[i], em.zero(), iv_r.base + static_cast<std::uint64_t>(i), 1);

  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    const std::uint64_t base = pay_r.base + b * 16;
    for (int i = 0; i < 16; ++i) {
      Reg p = em.load(s_cbc_ld[i], blk, base + static_cast<std::uint64_t>(i), 1);
      em.alu_into(s_cbc_x[i], st[i], st[i], p);
      s[i] ^= payload[b * 16 + static_cast<std::uint64_t>(i)];
    }

    em.alu_into(s_rk_init, rkp, em.zero());
    for (int i = 0; i < 16; ++i) {
      Reg k = em.load(s_ark0_ld[i], rkp, rk_r.base + static_cast<std::uint64_t>(i), 1);
      em.alu_into(s_ark0_x[i], st[i], st[i], k);
    }
    add_round_key(s, rk.data());

    for (int round = 1; round <= kRounds; ++round) {
      for (int i = 0; i < 16; ++i) em.load_into(s_sub[i], st[i], st[i], sbox_r.base + s[i], 1);
      sub_bytes(s);
      shift_rows(s);
      shift_rows(st);

      if (round != kRounds) {
        for (int c = 0; c < 4; ++c) {
          Reg* a = &st[4 * c];
          Reg t = em.alu(s_t0[c], a[0], a[1]);
          em.alu_into(s_t1[c], t, t, a[2]);
          em.alu_into(s_t2[c], t, t, a[3]);
          std::array<Reg, 4> n;
          for (int j = 0; j < 4; ++j) {
            const int i = 4 * c + j;
            Reg u = em.alu(s_mx_u[i], a[j], a[(j + 1) % 4]);
            Reg h = em.alu(s_mx_h[i], u);
            em.mul_into(s_mx_m[i], h, h);
            em.alu_into(s_mx_x[i], u, u, h);
            em.alu_into(s_mx_t[i], u, u, t);
            em.alu_into(s_mx_a[i], u, u, a[j]);
            n[j] = u;
          }
          for (int j = 0; j < 4; ++j) em.alu_into(s_mx_mv[4 * c + j], a[j], n[j]);
        }
        mix_columns(s);
      }

      em.alu_into(s_rk_inc, rkp, rkp);
      for (int i = 0; i < 16; ++i) {
        const auto off = static_cast<std::uint64_t>(16 * round + i);
        Reg k = em.load(s_ark_ld[i], rkp, rk_r.base + off, 1);
        em.alu_into(s_ark_x[i], st[i], st[i], k);
      }
      add_round_key(s, rk.data() + 16 * round);
      em.branch(s_r_loop, rkp, round < kRounds);
    }

    for (int i = 0; i < 16; ++i) em.store(s_out[i], st[i], blk, base + static_cast<std::uint64_t>(i), 1);
    em.alu_into(s_blk_inc, blk, blk);
    em.branch(s_blk_loop, blk, b + 1 < n_blocks);
  }
  em.roi_end();

  if (layout) *layout = mem.layout();
  return em.finish();
}

}  // namespace uarch::kernels
