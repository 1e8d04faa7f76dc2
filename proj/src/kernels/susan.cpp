// SUSAN-style corner response: for every interior pixel, sum a brightness
// similarity lookup over its 3x3 neighbourhood and flag pixels whose
// similar-area count falls under the geometric threshold.

#include <algorithm>
#include <cmath>
#include <vector>

#include "emitter.hpp"
#include "kernel_impls.hpp"

namespace uarch::kernels {

namespace {
constexpr int kBrightThresh = 20;
constexpr int kLutOffset = 258;
constexpr int kLutSize = 516;
constexpr int kCenterWeight = 100;
constexpr int kMaxNo = 450;
}  // namespace

Trace gen_susan_corners(const KernelSpec& spec, KernelLayout* layout) {
  const auto w = static_cast<std::uint64_t>(spec.params.at("width"));
  const auto h = static_cast<std::uint64_t>(spec.params.at("height"));
  std::mt19937_64 rng(spec.seed);

  // Synthetic scene: noisy background with a few bright rectangles.
  std::vector<std::uint8_t> img(w * h);
  for (auto& p : img) p = static_cast<std::uint8_t>(40 + draw(rng, 12));
  const std::uint64_t rects = 3 + draw(rng, 4);
  for (std::uint64_t r = 0; r < rects; ++r) {
    const std::uint64_t x0 = draw(rng, w), y0 = draw(rng, h);
    const std::uint64_t x1 = std::min(w, x0 + 1 + draw(rng, std::max<std::uint64_t>(1, w / 2)));
    const std::uint64_t y1 = std::min(h, y0 + 1 + draw(rng, std::max<std::uint64_t>(1, h / 2)));
    const auto level = static_cast<std::uint8_t>(120 + draw(rng, 120));
    for (std::uint64_t y = y0; y < y1; ++y) {
      for (std::uint64_t x = x0; x < x1; ++x) img[y * w + x] = static_cast<std::uint8_t>(level + draw(rng, 8));
    }
  }

  std::vector<std::uint8_t> lut(kLutSize);
  for (int k = 0; k < kLutSize; ++k) {
    const double t = static_cast<double>(k - kLutOffset) / kBrightThresh;
    lut[k] = static_cast<std::uint8_t>(std::lround(100.0 * std::exp(-std::pow(t, 6))));
  }

  AddressMap mem;
  const Region lut_r = mem.alloc("brightness_lut", kLutSize);
  const Region img_r = mem.alloc("image", w * h);
  const Region out_r = mem.alloc("response", w * h * 2);

  Emitter em("susan_corners");
  const Sid s_lut_v = em.site(), s_lut_st = em.site(), s_img_v = em.site(), s_img_st = em.site();
  const Sid s_y_init = em.site(), s_x_init = em.site(), s_pix = em.site();
  const Sid s_c_ld = em.site(), s_cp = em.site(), s_n_init = em.site();
  const Sid s_nb_ld = em.site(), s_nb_sub = em.site(), s_nb_lut = em.site(), s_nb_acc = em.site();
  const Sid s_thr = em.site(), s_thr_br = em.site(), s_resp = em.site(), s_resp_st = em.site();
  const Sid s_x_inc = em.site(), s_x_loop = em.site(), s_y_inc = em.site(), s_y_loop = em.site();

  Reg y_reg = em.pin();
  Reg x_reg = em.pin();
  Reg pix = em.pin();
  Reg n_reg = em.pin();

  for (int k = 0; k < kLutSize; ++k) {
    Reg v = em.alu(s_lut_v, em.zero());
    em.store(s_lut_st, v, em.zero(), lut_r.base + static_cast<std::uint64_t>(k), 1);
  }
  for (std::uint64_t i = 0; i < w * h; ++i) {
    Reg v = em.alu(s_img_v, em.zero());
    em.store(s_img_st, v, em.zero(), img_r.base + i, 1);
  }

  static constexpr int kDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static constexpr int kDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

  em.roi_begin();
  if (w >= 3 && h >= 3) {
    em.alu_into(s_y_init, y_reg, em.zero());
    for (std::uint64_t y = 1; y + 1 < h; ++y) {
      em.alu_into(s_x_init, x_reg, em.zero());
      for (std::uint64_t x = 1; x + 1 < w; ++x) {
        const std::uint64_t idx = y * w + x;
        em.alu_into(s_pix, pix, y_reg, x_reg);
        Reg c = em.load(s_c_ld, pix, img_r.base + idx, 1);
        Reg cp = em.alu(s_cp, c);
        em.alu_into(s_n_init, n_reg, em.zero());
        int n = kCenterWeight;
        for (int k = 0; k < 8; ++k) {
          const std::uint64_t nidx = (y + kDy[k]) * w + (x + kDx[k]);
          Reg p = em.load(s_nb_ld, pix, img_r.base + nidx, 1);
          Reg d = em.alu(s_nb_sub, cp, p);
          const int off = kLutOffset + img[idx] - img[nidx];
          Reg b = em.load(s_nb_lut, d, lut_r.base + static_cast<std::uint64_t>(off), 1);
          em.alu_into(s_nb_acc, n_reg, n_reg, b);
          n += lut[static_cast<std::size_t>(off)];
        }
        Reg t = em.alu(s_thr, n_reg);
        const bool corner = n < kMaxNo;
        em.branch(s_thr_br, t, !corner);
        if (corner) {
          Reg r = em.alu(s_resp, n_reg);
          em.store(s_resp_st, r, pix, out_r.base + idx * 2, 2);
        }
        em.alu_into(s_x_inc, x_reg, x_reg);
        em.branch(s_x_loop, x_reg, x + 2 < w);
      }
      em.alu_into(s_y_inc, y_reg, y_reg);
      em.branch(s_y_loop, y_reg, y + 2 < h);
    }
  }
  em.roi_end();

  if (layout) *layout = mem.layout();
  return em.finish();
}

}  // namespace uarch::kernels
