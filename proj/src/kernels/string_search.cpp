// Naive case-insensitive search of several needles in one haystack, folding
// case through a 256-entry lookup table.

#include <cctype>

#include "emitter.hpp"
#include "kernel_impls.hpp"

namespace uarch::kernels {

namespace {
constexpr std::string_view kAlphabet = "abcdeABCDE  ";

char flip_case(char c, std::mt19937_64& rng) {
  if (!std::isalpha(static_cast<unsigned char>(c)) || draw(rng, 2) == 0) return c;
  return std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c))
                                                     : static_cast<char>(std::tolower(c));
}

std::uint8_t fold(char c) { return static_cast<std::uint8_t>(std::tolower(static_cast<unsigned char>(c))); }
}  // namespace

StringSearchInput string_search_input(const KernelSpec& raw) {
  const KernelSpec spec = resolve_kernel_spec(raw);
  const auto hay_len = static_cast<std::size_t>(spec.params.at("haystack"));
  const auto k = static_cast<std::size_t>(spec.params.at("needle_len"));
  const auto count = static_cast<std::size_t>(spec.params.at("n_needles"));
  std::mt19937_64 rng(spec.seed);

  StringSearchInput in;
  in.haystack.resize(hay_len);
  for (auto& c : in.haystack) c = kAlphabet[draw(rng, kAlphabet.size())];
  for (std::size_t i = 0; i < count; ++i) {
    std::string needle(k, ' ');
    if (i % 2 == 0) {
      const std::size_t at = draw(rng, hay_len - k + 1);
      for (std::size_t j = 0; j < k; ++j) needle[j] = flip_case(in.haystack[at + j], rng);
    } else {
      for (auto& c : needle) c = kAlphabet[draw(rng, kAlphabet.size())];
    }
    in.needles.push_back(std::move(needle));
  }
  return in;
}

Trace gen_string_search(const KernelSpec& spec, KernelLayout* layout) {
  const StringSearchInput in = string_search_input(spec);
  const std::size_t h = in.haystack.size();
  const std::size_t k = in.needles.empty() ? 0 : in.needles.front().size();

  AddressMap mem;
  const Region lower_r = mem.alloc("lower_table", 256);
  const Region hay_r = mem.alloc("haystack", h);
  const Region needle_r = mem.alloc("needles", in.needles.size() * k);
  const Region folded_r = mem.alloc("folded_needle", k);
  const Region result_r = mem.alloc("results", in.needles.size() * 4);

  Emitter em("string_search");
  const Sid s_tab_v = em.site(), s_tab_st = em.site();
  const Sid s_hay_v = em.site(), s_hay_st = em.site();
  const Sid s_nd_v = em.site(), s_nd_st = em.site();
  const Sid s_f_init = em.site(), s_f_addr = em.site(), s_f_ld = em.site(), s_f_low = em.site(),
            s_f_st = em.site(), s_f_inc = em.site(), s_f_loop = em.site();
  const Sid s_n_init = em.site(), s_p_init = em.site(), s_m_init = em.site(), s_j_init = em.site();
  const Sid s_c_addr = em.site(), s_c_hay = em.site(), s_c_low = em.site(), s_c_ndl = em.site(),
            s_c_cmp = em.site(), s_c_br = em.site(), s_c_inc = em.site(), s_c_loop = em.site();
  const Sid s_hit_inc = em.site();
  const Sid s_p_inc = em.site(), s_p_loop = em.site();
  const Sid s_res_addr = em.site(), s_res_st = em.site(), s_n_inc = em.site(), s_n_loop = em.site();

  Reg nidx = em.pin();
  Reg pos = em.pin();
  Reg j = em.pin();
  Reg hits = em.pin();

  for (std::uint64_t c = 0; c < 256; ++c) {
    Reg v = em.alu(s_tab_v, em.zero());
    em.store(s_tab_st, v, em.zero(), lower_r.base + c, 1);
  }
  for (std::size_t i = 0; i < h; ++i) {
    Reg v = em.alu(s_hay_v, em.zero());
    em.store(s_hay_st, v, em.zero(), hay_r.base + i, 1);
  }
  for (std::size_t n = 0; n < in.needles.size(); ++n) {
    for (std::size_t i = 0; i < k; ++i) {
      Reg v = em.alu(s_nd_v, em.zero());
      em.store(s_nd_st, v, em.zero(), needle_r.base + n * k + i, 1);
    }
  }
  em.alu_into(s_n_init, nidx, em.zero());

  em.roi_begin();
  for (std::size_t n = 0; n < in.needles.size(); ++n) {
    const std::string& needle = in.needles[n];
    // Fold the needle once.
    em.alu_into(s_f_init, j, em.zero());
    for (std::size_t i = 0; i < k; ++i) {
      Reg a = em.alu(s_f_addr, nidx, j);
      Reg c = em.load(s_f_ld, a, needle_r.base + n * k + i, 1);
      Reg lc = em.load(s_f_low, c, lower_r.base + static_cast<std::uint8_t>(needle[i]), 1);
      em.store(s_f_st, lc, j, folded_r.base + i, 1);
      em.alu_into(s_f_inc, j, j);
      em.branch(s_f_loop, j, i + 1 < k);
    }

    em.alu_into(s_m_init, hits, em.zero());
    em.alu_into(s_p_init, pos, em.zero());
    for (std::size_t p = 0; p + k <= h; ++p) {
      em.alu_into(s_j_init, j, em.zero());
      std::size_t i = 0;
      for (; i < k; ++i) {
        const char hc = in.haystack[p + i];
        Reg a = em.alu(s_c_addr, pos, j);
        Reg c = em.load(s_c_hay, a, hay_r.base + p + i, 1);
        Reg lc = em.load(s_c_low, c, lower_r.base + static_cast<std::uint8_t>(hc), 1);
        Reg nc = em.load(s_c_ndl, j, folded_r.base + i, 1);
        Reg diff = em.alu(s_c_cmp, lc, nc);
        const bool mismatch = fold(hc) != fold(needle[i]);
        em.branch(s_c_br, diff, mismatch);
        if (mismatch) break;
        em.alu_into(s_c_inc, j, j);
        em.branch(s_c_loop, j, i + 1 < k);
      }
      if (i == k) em.alu_into(s_hit_inc, hits, hits);
      em.alu_into(s_p_inc, pos, pos);
      em.branch(s_p_loop, pos, p + k + 1 <= h);
    }
    Reg ra = em.alu(s_res_addr, nidx);
    em.store(s_res_st, hits, ra, result_r.base + n * 4, 4);
    em.alu_into(s_n_inc, nidx, nidx);
    em.branch(s_n_loop, nidx, n + 1 < in.needles.size());
  }
  em.roi_end();

  if (layout) *layout = mem.layout();
  return em.finish();
}

}  // namespace uarch::kernels
