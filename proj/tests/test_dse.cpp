#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "uarch/dse.hpp"

using namespace uarch;

namespace {

std::vector<Benchmark> tiny_benchmarks() {
  return make_benchmarks({{"dijkstra", {{"n_nodes", 6}}, 1},
                          {"flow_class", {{"n_packets", 48}, {"n_buckets", 16}}, 1},
                          {"ipsec_aes", {{"n_blocks", 2}}, 1}});
}

}  // namespace

TEST_CASE("per_pen arithmetic") {
  CHECK(per_pen(10000, 10000) == 0.0);
  CHECK(per_pen(10204, 10000) == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK(per_pen(9000, 10000) == doctest::Approx(100.0 / 9.0));
  CHECK(per_pen(20000, 10000) == doctest::Approx(-50.0));
  CHECK_THROWS(per_pen(0, 10));
  CHECK_THROWS(per_pen(10, 0));
}

TEST_CASE("best and optimum on reference curves") {
  const Curve rob{{32, -1.91}, {34, -1.63}, {64, 0.0}};
  CHECK(find_best(rob) == 64);
  CHECK(find_optimum(rob) == 32u);
  CHECK(find_best(Curve{{8, 0.0}, {16, 0.0}}) == 8);
  CHECK(find_best(Curve{{12, -3.0}}) == 12);
  CHECK(find_optimum(Curve{{8, -1.08}, {20, -0.26}, {32, 0.0}}) == 8u);
  CHECK(find_optimum(Curve{{4, -9.0}, {8, 0.0}}) == 8u);
  // Within epsilon of the top counts as no penalty.
  CHECK(find_best(Curve{{8, -0.04}, {16, 0.0}}) == 8);
  CHECK(find_best(Curve{{8, -0.06}, {16, 0.0}}) == 16);
  CHECK_FALSE(find_optimum(Curve{{4, -1.0}, {8, 0.0}}, -1.0).has_value());
  CHECK_THROWS(find_best(Curve{}));
  CHECK_THROWS(find_best(Curve{{8, 0.0}, {8, 1.0}}));
  CHECK_THROWS(find_best(Curve{{16, 0.0}, {8, 1.0}}));
}

TEST_CASE("extraction properties over random curves") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> val(-20.0, 5.0);
  std::uniform_int_distribution<int> len(1, 9);
  for (int trial = 0; trial < 2000; ++trial) {
    Curve c;
    std::uint32_t size = 4;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      size += 2 + static_cast<std::uint32_t>(rng() % 8) * 2;
      c.emplace_back(size, val(rng));
    }
    const auto best = find_best(c);
    const auto opt = find_optimum(c);
    REQUIRE(opt.has_value());
    CHECK(*opt <= best);

    // A worse-than-max point anywhere leaves the best size unchanged.
    double top = -1e9;
    for (auto& [s, v] : c) top = std::max(top, v);
    Curve d = c;
    const std::uint32_t extra = c[rng() % c.size()].first + 1;
    d.insert(std::upper_bound(d.begin(), d.end(), std::make_pair(extra, -1e300)),
             {extra, top - kDefaultEpsilonPp - 1.0});
    CHECK(find_best(d) == best);
  }
}

TEST_CASE("extract flags saturation and degradation") {
  SweepResult r;
  r.axis = "l1_kb";
  for (auto [v, a] : std::vector<std::pair<std::uint32_t, double>>{{16, -3.0}, {32, 1.0}, {64, 0.0}}) {
    SweepPoint p;
    p.value = v;
    p.avg_per_pen = a;
    r.points.push_back(p);
  }
  auto e = extract(r);
  CHECK(e.best == "32");
  CHECK(e.best_index == 1);
  CHECK(e.optimum == std::optional<std::string>("32"));
  CHECK(e.saturation_detected);
  CHECK(e.degradation_detected);
  r.points[2].avg_per_pen = 0.98;
  e = extract(r);
  CHECK(e.saturation_detected);
  CHECK_FALSE(e.degradation_detected);
  r.points.pop_back();
  e = extract(r);
  CHECK_FALSE(e.saturation_detected);
}

TEST_CASE("axis names and substitution") {
  for (Axis a : {Axis::l1_kb, Axis::l2_kb, Axis::phys_regs, Axis::rob, Axis::iq, Axis::lsq}) {
    CHECK(parse_axis(axis_name(a)) == a);
    const MachineConfig m = with_axis(MachineConfig{}, a, 256);
    CHECK(axis_value(m, a) == 256);
  }
  CHECK_THROWS_AS(parse_axis("width"), ConfigError);
}

TEST_CASE("cache latencies follow the delay model") {
  const CacheTimingModel model;
  MachineConfig m;
  m.cache.l1_kb = 16;
  const auto small = build_hierarchy(m, model);
  m.cache.l1_kb = 512;
  m.cache.l2_kb = 1024;
  const auto big = build_hierarchy(m, model);
  CHECK(big.l1d.hit_cycles > small.l1d.hit_cycles);
  CHECK(big.l2.hit_cycles > small.l2.hit_cycles);
  CHECK(small.l1i.geometry == small.l1d.geometry);
  CHECK(small.l2.geometry.access_type == AccessType::normal_serial);
  m.cache.use_delay_model = false;
  const auto fixed = build_hierarchy(m, model);
  CHECK(fixed.l1d.hit_cycles == m.cache.l1_hit_cycles);
  CHECK(fixed.l2.hit_cycles == m.cache.l2_hit_cycles);
  m.cache.l2_kb = 128;
  CHECK_THROWS(build_hierarchy(m, model));
  CHECK(cache_area_mm2(MachineConfig{}.cache, model) ==
        doctest::Approx(2 * model.area_mm2(l1_geometry(MachineConfig{}.cache)) +
                        model.area_mm2(l2_geometry(MachineConfig{}.cache))));
}

TEST_CASE("sweep baseline identity and averaging") {
  Runner runner(tiny_benchmarks(), CacheTimingModel{}, 2);
  const MachineConfig base;
  const SweepResult r = run_sweep({Axis::rob, {8, 16, base.core.rob_size, 128}, base}, runner);
  CHECK(r.axis == "rob");
  CHECK(r.benchmarks == std::vector<std::string>{"dijkstra", "flow_class", "ipsec_aes"});
  REQUIRE(r.points.size() == 4);
  for (std::size_t b = 0; b < r.benchmarks.size(); ++b) {
    CHECK(r.points[2].per_pen[b] == 0.0);
    CHECK(r.points[2].roi_cycles[b] == r.baseline_cycles[b]);
  }
  for (const auto& p : r.points) {
    CHECK(p.avg_per_pen == doctest::Approx(oracle::mean(p.per_pen)).epsilon(1e-12));
    for (std::size_t b = 0; b < p.per_pen.size(); ++b) {
      CHECK(p.per_pen[b] == per_pen(p.roi_cycles[b], r.baseline_cycles[b]));
      CHECK(p.ipc_roi[b] > 0.0);
    }
  }
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    CHECK(r.points[i].avg_per_pen >= r.points[i - 1].avg_per_pen);
  }
  CHECK(r.points[0].area_mm2 == 0.0);
}

TEST_CASE("runner results do not depend on the job count and are memoized") {
  std::vector<MachineConfig> cfgs;
  for (std::uint32_t v : {4u, 8u, 12u, 16u}) cfgs.push_back(with_axis(MachineConfig{}, Axis::iq, v));
  Runner one(tiny_benchmarks(), CacheTimingModel{}, 1);
  Runner many(tiny_benchmarks(), CacheTimingModel{}, 8);
  const auto a = one.run(cfgs);
  const auto b = many.run(cfgs);
  CHECK(a == b);
  CHECK(one.simulations() == cfgs.size() * 3);
  cfgs.push_back(cfgs.front());
  const auto c = one.run(cfgs);
  CHECK(one.simulations() == 4 * 3);
  CHECK(c.back() == a.front());
  CHECK_THROWS_AS(Runner({}, CacheTimingModel{}, 1), ConfigError);
}

TEST_CASE("joint cache sweep skips L2 smaller than L1") {
  Runner runner(tiny_benchmarks(), CacheTimingModel{}, 2);
  const SweepResult r = run_cache_sweep({16, 64, 256}, {128, 256}, MachineConfig{}, runner);
  CHECK(r.axis == "l1_l2");
  std::vector<std::string> labels;
  for (const auto& p : r.points) labels.push_back(p.label());
  CHECK(labels == std::vector<std::string>{"16-128", "16-256", "64-128", "64-256", "256-256"});
  for (const auto& p : r.points) {
    CHECK(p.area_mm2 > 0.0);
    CHECK(p.perf_per_area > 0.0);
  }
  CHECK(r.points.back().area_mm2 > r.points.front().area_mm2);
}

TEST_CASE("staged exploration on one-point grids echoes the baseline") {
  Runner runner(tiny_benchmarks(), CacheTimingModel{}, 2);
  const MachineConfig base;
  Grids g;
  g.l1_kb = {base.cache.l1_kb};
  g.l2_kb = {base.cache.l2_kb};
  g.phys_regs = {base.core.phys_regs};
  g.rob = {base.core.rob_size};
  g.iq = {base.core.iq_size};
  g.lsq = {base.core.lsq_size};
  const ExploreReport rep = staged_explore({base, g}, runner);
  CHECK(rep.final_config == base);
  CHECK(rep.window.size() == 3);
  for (const StageReport* s : {&rep.cache, &rep.phys_regs, &rep.window[0], &rep.window[1], &rep.window[2]}) {
    REQUIRE(s->sweep.points.size() == 1);
    for (double p : s->sweep.points[0].per_pen) CHECK(p == 0.0);
    CHECK(s->sweep.points[0].avg_per_pen == 0.0);
  }
  CHECK(rep.cache.reference.core.fetch_width == 1);
  CHECK(rep.phys_regs.reference.core.fetch_width == base.core.fetch_width);
  CHECK(rep.best_cache_area_mm2 == rep.optimum_cache_area_mm2);
}

TEST_CASE("stage failures name the stage") {
  Runner runner(tiny_benchmarks(), CacheTimingModel{}, 1);
  Grids g;
  g.l1_kb = {64};
  g.l2_kb = {128};
  g.phys_regs = {20};
  try {
    staged_explore({MachineConfig{}, g}, runner);
    FAIL("expected a stage failure");
  } catch (const DseError& e) {
    CHECK(std::string(e.what()).find("stage 2 (phys_regs)") != std::string::npos);
  }
  Grids bad;
  bad.rob = {16, 8};
  CHECK_THROWS_AS(check_grids(bad), ConfigError);
  bad.rob = {};
  CHECK_THROWS_AS(check_grids(bad), ConfigError);
}
