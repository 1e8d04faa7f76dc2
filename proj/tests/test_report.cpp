#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "uarch/config.hpp"
#include "uarch/report.hpp"
#include "uarch/serialize.hpp"

using namespace uarch;
namespace fs = std::filesystem;

namespace {

SweepResult sample_sweep() {
  SweepResult r;
  r.axis = "iq";
  r.benchmarks = {"a", "b", "c"};
  r.baseline_cycles = {1000, 2000, 3000};
  const std::uint64_t cyc[2][3] = {{1100, 2100, 3300}, {1000, 1999, 2900}};
  for (int i = 0; i < 2; ++i) {
    SweepPoint p;
    p.value = i == 0 ? 8 : 16;
    for (int b = 0; b < 3; ++b) {
      p.roi_cycles.push_back(cyc[i][b]);
      p.ipc_roi.push_back(1000.0 / static_cast<double>(cyc[i][b]));
      p.per_pen.push_back(per_pen(cyc[i][b], r.baseline_cycles[b]));
    }
    p.avg_per_pen = oracle::mean(p.per_pen);
    r.points.push_back(p);
  }
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    rows.push_back(cols);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uarch_report_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("empty results give a header-only CSV") {
  CHECK(csv_string({}) == std::string(kCsvHeader) + "\n");
}

TEST_CASE("CSV rows and AVG summaries") {
  const SweepResult r = sample_sweep();
  const auto rows = csv_rows(csv_string({r}));
  REQUIRE(rows.size() == 1 + 2 * 4);
  CHECK(rows[0] == std::vector<std::string>{"axis", "value", "benchmark", "roi_cycles", "ipc_roi", "per_pen"});
  for (std::size_t p = 0; p < 2; ++p) {
    std::vector<double> pens, cycles;
    for (std::size_t b = 0; b < 3; ++b) {
      const auto& row = rows[1 + p * 4 + b];
      CHECK(row[0] == "iq");
      CHECK(row[2] == r.benchmarks[b]);
      CHECK(std::stoull(row[3]) == r.points[p].roi_cycles[b]);
      pens.push_back(std::stod(row[5]));
      cycles.push_back(std::stod(row[3]));
    }
    const auto& avg = rows[1 + p * 4 + 3];
    CHECK(avg[2] == "AVG");
    CHECK(std::abs(std::stod(avg[5]) - oracle::mean(pens)) < 1e-9);
    CHECK(std::abs(std::stod(avg[3]) - oracle::mean(cycles)) < 1e-9);
  }
}

TEST_CASE("dat tables") {
  const SweepResult r = sample_sweep();
  std::ostringstream out;
  write_dat(out, r);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "# iq a b c avg");
  std::string label;
  double a, b, c, avg;
  in >> label >> a >> b >> c >> avg;
  CHECK(label == "8");
  CHECK(a == doctest::Approx(r.points[0].per_pen[0]).epsilon(1e-4));
  CHECK(avg == doctest::Approx(r.points[0].avg_per_pen).epsilon(1e-4));
}

TEST_CASE("JSON round trips") {
  const SweepResult r = sample_sweep();
  const json j = r;
  CHECK(j.at("axis") == "iq");
  CHECK(j.at("points")[0].at("avg_per_pen").is_number());
  CHECK(json(j.get<SweepResult>()) == j);

  const ExtractionResult e = extract(r);
  const json je = e;
  CHECK(je.at("best_size") == "16");
  CHECK(je.contains("saturation_detected"));
  CHECK(json(je.get<ExtractionResult>()) == je);

  MachineConfig m;
  m.core.rob_size = 96;
  m.cache.l1_kb = 32;
  CHECK(json(m).get<MachineConfig>() == m);
  CHECK(canonical(m) == canonical(json(m).get<MachineConfig>()));
  CHECK(canonical(m) != canonical(MachineConfig{}));

  SimResult s;
  s.total_cycles = 10;
  s.roi_cycles = 7;
  s.cache.l1d.accesses = 4;
  s.cache.l1d.hits = 3;
  s.cache.l1d.misses = 1;
  const json js = s;
  CHECK(js.at("cache").at("l1d").at("miss_rate") == 0.25);
  CHECK(js.get<SimResult>() == s);
}

TEST_CASE("strict readers reject unknown keys and bad types") {
  json j = MachineConfig{};
  j["core"]["rob"] = 3;
  CHECK_THROWS_AS(j.get<MachineConfig>(), ConfigError);
  j = MachineConfig{};
  j["core"]["rob_size"] = -1;
  CHECK_THROWS_AS(j.get<MachineConfig>(), ConfigError);
  j = MachineConfig{};
  j["cache"]["l1_kb"] = "big";
  CHECK_THROWS_AS(j.get<MachineConfig>(), ConfigError);
}

TEST_CASE("run configuration parsing") {
  RunConfig c = parse_run_config(json::object(), 5);
  CHECK(c.machine == MachineConfig{});
  CHECK(c.grids == Grids{});
  CHECK(c.benchmarks.size() == 6);
  CHECK(c.benchmarks[0].seed == 5);
  CHECK(c.output_dir == "out");

  c = parse_run_config(json::parse(R"({
    "core": {"rob_size": 32, "fetch_width": 2},
    "cache": {"l1_kb": 32, "delay_override": null},
    "grids": {"rob": [16, 32]},
    "benchmarks": [{"kernel": "dijkstra", "params": {"n_nodes": 8}}, {"kernel": "ipsec_aes", "seed": 9}],
    "extraction": {"threshold_pp": 1.5},
    "output_dir": "results"
  })"), 2);
  CHECK(c.machine.core.rob_size == 32);
  CHECK(c.machine.core.fetch_width == 2);
  CHECK(c.machine.cache.l1_kb == 32);
  CHECK(c.grids.rob == std::vector<std::uint32_t>{16, 32});
  CHECK(c.grids.iq == Grids{}.iq);
  REQUIRE(c.benchmarks.size() == 2);
  CHECK(c.benchmarks[0].seed == 2);
  CHECK(c.benchmarks[0].params.at("n_nodes") == 8);
  CHECK(c.benchmarks[1].seed == 9);
  CHECK(c.benchmarks[1].params.at("n_blocks") == 64);
  CHECK(c.threshold_pp == 1.5);
  CHECK(c.output_dir == "results");

  // Serialized form parses back to the same configuration.
  const RunConfig back = parse_run_config(config_json(c), 2);
  CHECK(back.machine == c.machine);
  CHECK(back.grids == c.grids);
  CHECK(json(back.benchmarks) == json(c.benchmarks));

  const char* bad[] = {
      R"({"cores": {}})",
      R"({"core": {"rob_size": 0}})",
      R"({"core": {"phys_regs": 16}})",
      R"({"cache": {"l1_kb": 0}})",
      R"({"cache": {"l1_kb": 256, "l2_kb": 128}})",
      R"({"cache": {"delay_override": "missing.csv"}})",
      R"({"grids": {"lsq": [8, 8]}})",
      R"({"grids": {"iq": []}})",
      R"({"benchmarks": []})",
      R"({"benchmarks": [{"kernel": "quicksort"}]})",
      R"({"benchmarks": [{"kernel": "dijkstra", "params": {"n_nodes": 0}}]})",
      R"({"extraction": {"threshold_pp": -1}})",
      R"({"extraction": {"tau": 1}})",
      R"({"output_dir": ""})",
      R"([1, 2])",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_run_config(json::parse(text)), ConfigError);
  }
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("delay override paths resolve against the config file") {
  const fs::path dir = scratch("override");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "delays.csv") << "capacity_bytes,assoc,type,access_ns\n65536,4,fast,2.5\n";
    std::ofstream(dir / "cfg.json") << R"({"cache": {"delay_override": "delays.csv"}})";
  }
  const RunConfig c = load_run_config((dir / "cfg.json").string());
  REQUIRE(c.delay_override.has_value());
  const CacheTimingModel m = make_timing_model(c);
  CHECK(m.access_time_ns(l1_geometry(c.machine.cache)) == 2.5);
  CHECK(build_hierarchy(c.machine, m).l1d.hit_cycles == 3);
  fs::remove_all(dir);
}

TEST_CASE("sweep artifacts on disk") {
  const fs::path dir = scratch("sweep");
  const SweepResult r = sample_sweep();
  const auto files = write_sweep_outputs(r, dir);
  CHECK(files == std::vector<std::string>{"sweep_iq.csv", "sweep_iq.json", "sweep_iq.dat"});
  for (const auto& f : files) CHECK(fs::exists(dir / f));
  std::ifstream in(dir / "sweep_iq.json");
  CHECK(json::parse(in) == json(r));
  fs::remove_all(dir);
}
