// All-pairs shortest paths by repeated array-based Dijkstra over a dense
// adjacency matrix.

#include <limits>
#include <vector>

#include "emitter.hpp"
#include "kernel_impls.hpp"

namespace uarch::kernels {

namespace {
constexpr std::int32_t kNone = 9999;
constexpr std::int32_t kInf = std::numeric_limits<std::int32_t>::max() / 2;
}  // namespace

Trace gen_dijkstra(const KernelSpec& spec, KernelLayout* layout) {
  const auto n = static_cast<std::uint64_t>(spec.params.at("n_nodes"));
  std::mt19937_64 rng(spec.seed);

  std::vector<std::int32_t> adj(n * n);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < n; ++j) {
      const bool edge = i != j && draw(rng, 10) < 7;
      adj[i * n + j] = edge ? static_cast<std::int32_t>(1 + draw(rng, 99)) : kNone;
    }
  }

  AddressMap mem;
  const Region adj_r = mem.alloc("adj", n * n * 4);
  const Region dist_r = mem.alloc("dist", n * 4);
  const Region visited_r = mem.alloc("visited", n * 4);

  Emitter em("dijkstra");
  const Sid s_init_val = em.site(), s_init_st = em.site(), s_init_inf = em.site(),
            s_init_one = em.site(), s_init_src = em.site();
  const Sid s_src_inc = em.site(), s_src_br = em.site();
  const Sid s_clr_addr = em.site(), s_clr_dist = em.site(), s_clr_vis = em.site(),
            s_clr_inc = em.site(), s_clr_br = em.site();
  const Sid s_dsrc_addr = em.site(), s_dsrc_st = em.site();
  const Sid s_clr_v = em.site(), s_it_init = em.site();
  const Sid s_it_best = em.site(), s_it_u = em.site(), s_it_v = em.site();
  const Sid s_sc_addr = em.site(), s_sc_vis = em.site(), s_sc_visbr = em.site(),
            s_sc_dist = em.site(), s_sc_cmp = em.site(), s_sc_br = em.site(),
            s_sc_best = em.site(), s_sc_u = em.site(), s_sc_inc = em.site(), s_sc_loop = em.site();
  const Sid s_u_chk = em.site(), s_mark_addr = em.site(), s_mark_st = em.site(),
            s_row = em.site(), s_rv = em.site();
  const Sid s_rx_addr = em.site(), s_rx_w = em.site(), s_rx_none = em.site(),
            s_rx_sum = em.site(), s_rx_daddr = em.site(), s_rx_d = em.site(),
            s_rx_cmp = em.site(), s_rx_br = em.site(), s_rx_st = em.site(),
            s_rx_inc = em.site(), s_rx_loop = em.site();
  const Sid s_it_inc = em.site(), s_it_loop = em.site();

  Reg src = em.pin();
  Reg iter = em.pin();
  Reg v = em.pin();
  Reg u = em.pin();
  Reg best = em.pin();
  Reg row = em.pin();
  Reg inf = em.pin();
  Reg one = em.pin();

  // Matrix load from the input file.
  for (std::uint64_t i = 0; i < n * n; ++i) {
    Reg w = em.alu(s_init_val, em.zero());
    em.store(s_init_st, w, em.zero(), adj_r.base + i * 4, 4);
  }
  em.alu_into(s_init_inf, inf, em.zero());
  em.alu_into(s_init_one, one, em.zero());
  em.alu_into(s_init_src, src, em.zero());

  em.roi_begin();
  std::vector<std::int32_t> dist(n);
  std::vector<std::uint8_t> visited(n);
  for (std::uint64_t s = 0; s < n; ++s) {
    em.alu_into(s_clr_v, v, em.zero());
    for (std::uint64_t j = 0; j < n; ++j) {
      dist[j] = kInf;
      visited[j] = 0;
      Reg a = em.alu(s_clr_addr, v);
      em.store(s_clr_dist, inf, a, dist_r.base + j * 4, 4);
      em.store(s_clr_vis, em.zero(), a, visited_r.base + j * 4, 4);
      em.alu_into(s_clr_inc, v, v);
      em.branch(s_clr_br, v, j + 1 < n);
    }
    dist[s] = 0;
    {
      Reg a = em.alu(s_dsrc_addr, src);
      em.store(s_dsrc_st, em.zero(), a, dist_r.base + s * 4, 4);
    }

    em.alu_into(s_it_init, iter, em.zero());
    for (std::uint64_t it = 0; it < n; ++it) {
      // Select the closest unvisited node.
      em.alu_into(s_it_best, best, inf);
      em.alu_into(s_it_u, u, em.zero());
      em.alu_into(s_it_v, v, em.zero());
      std::int32_t best_d = kInf;
      std::int64_t best_u = -1;
      for (std::uint64_t j = 0; j < n; ++j) {
        Reg a = em.alu(s_sc_addr, v);
        Reg vis = em.load(s_sc_vis, a, visited_r.base + j * 4, 4);
        em.branch(s_sc_visbr, vis, visited[j] != 0);
        if (!visited[j]) {
          Reg d = em.load(s_sc_dist, a, dist_r.base + j * 4, 4);
          Reg c = em.alu(s_sc_cmp, d, best);
          const bool closer = dist[j] < best_d;
          em.branch(s_sc_br, c, closer);
          if (closer) {
            best_d = dist[j];
            best_u = static_cast<std::int64_t>(j);
            em.alu_into(s_sc_best, best, d);
            em.alu_into(s_sc_u, u, v);
          }
        }
        em.alu_into(s_sc_inc, v, v);
        em.branch(s_sc_loop, v, j + 1 < n);
      }
      em.branch(s_u_chk, u, best_u < 0);
      if (best_u < 0) break;  // remaining nodes unreachable
      const auto un = static_cast<std::uint64_t>(best_u);
      visited[un] = 1;
      {
        Reg a = em.alu(s_mark_addr, u);
        em.store(s_mark_st, one, a, visited_r.base + un * 4, 4);
      }

      // Relax the outgoing edges of u.
      em.alu_into(s_row, row, u);
      em.alu_into(s_rv, v, em.zero());
      for (std::uint64_t j = 0; j < n; ++j) {
        const std::int32_t w = adj[un * n + j];
        Reg a = em.alu(s_rx_addr, row, v);
        Reg wr = em.load(s_rx_w, a, adj_r.base + (un * n + j) * 4, 4);
        em.branch(s_rx_none, wr, w == kNone);
        if (w != kNone) {
          Reg sum = em.alu(s_rx_sum, wr, best);
          Reg da = em.alu(s_rx_daddr, v);
          Reg d = em.load(s_rx_d, da, dist_r.base + j * 4, 4);
          Reg c = em.alu(s_rx_cmp, sum, d);
          const bool shorter = best_d + w < dist[j];
          em.branch(s_rx_br, c, shorter);
          if (shorter) {
            dist[j] = best_d + w;
            em.store(s_rx_st, sum, da, dist_r.base + j * 4, 4);
          }
        }
        em.alu_into(s_rx_inc, v, v);
        em.branch(s_rx_loop, v, j + 1 < n);
      }
      em.alu_into(s_it_inc, iter, iter);
      em.branch(s_it_loop, iter, it + 1 < n);
    }
    em.alu_into(s_src_inc, src, src);
    em.branch(s_src_br, src, s + 1 < n);
  }
  em.roi_end();

  if (layout) *layout = mem.layout();
  return em.finish();
}

}  // namespace uarch::kernels
