#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_run.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workdir {
  fs::path path;
  explicit Workdir(const std::string& name) : path(fs::temp_directory_path() / ("uarch_cli_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
  void write(const std::string& f, const std::string& text) const { std::ofstream(path / f) << text; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kSmallConfig = R"({
  "benchmarks": [
    {"kernel": "dijkstra", "params": {"n_nodes": 6}},
    {"kernel": "ipv4_trie", "params": {"n_routes": 32, "n_lookups": 64}}
  ],
  "grids": {"l1_kb": [16, 64], "l2_kb": [128], "phys_regs": [48, 80], "rob": [16, 64], "iq": [8, 20], "lsq": [8, 12]}
})";

const char* kOnePointConfig = R"({
  "benchmarks": [{"kernel": "flow_class", "params": {"n_packets": 32}}],
  "grids": {"l1_kb": [64], "l2_kb": [128], "phys_regs": [80], "rob": [64], "iq": [20], "lsq": [12]}
})";

}  // namespace

TEST_CASE("usage errors exit 2 and help exits 0") {
  CHECK(cli::run("").code == 2);
  CHECK(cli::run("frobnicate").code == 2);
  CHECK(cli::run("--help").code == 0);
  CHECK(cli::run("sim --bogus-flag").code == 2);
  CHECK(cli::run("gen dijkstra --n-nodes eight -o x").code == 2);
}

TEST_CASE("gen") {
  Workdir w("gen");
  const auto ok = cli::run("gen dijkstra --n-nodes 8 --seed 1 -o " + w / "d.trace");
  CHECK(ok.code == 0);
  CHECK(fs::exists(w / "d.trace"));
  const json j = json::parse(ok.out);
  CHECK(j.at("kernel") == "dijkstra");
  CHECK(j.at("records").get<std::size_t>() > 0);
  CHECK(j.at("params").at("n_nodes") == 8);

  CHECK(cli::run("gen quicksort -o " + w / "q.trace").code == 2);
  CHECK(cli::run("gen dijkstra --n-nodes 0 -o " + w / "q.trace").code == 2);
  CHECK(cli::run("gen dijkstra").code == 2);
  CHECK(cli::run("gen dijkstra -o " + w / "no/such/dir/d.trace").code == 1);

  const json list = json::parse(cli::run("gen --list").out);
  CHECK(list.size() == 6);

  // The environment seed applies when --seed is absent.
  CHECK(cli::run("gen ipsec_aes --n-blocks 1 -o " + w / "e1.trace", "UARCH_DSE_SEED=42").code == 0);
  CHECK(cli::run("gen ipsec_aes --n-blocks 1 --seed 42 -o " + w / "e2.trace").code == 0);
  CHECK(cli::run("gen ipsec_aes --n-blocks 1 -o " + w / "e3.trace").code == 0);
  CHECK(slurp(w / "e1.trace") == slurp(w / "e2.trace"));
  CHECK(slurp(w / "e1.trace") != slurp(w / "e3.trace"));
  CHECK(cli::run("gen ipsec_aes -o " + w / "e4.trace", "UARCH_DSE_SEED=x1").code == 2);
}

TEST_CASE("sim") {
  Workdir w("sim");
  w.write("cfg.json", "{}");
  w.write("bad.json", R"({"core": {"rob_size": 0}})");
  w.write("broken.json", "{ not json");
  w.write("plain.trace", "0 A r1 r2 -\n1 A r3 r1 -\n");
  w.write("garbled.trace", "0 Q r1\n");
  REQUIRE(cli::run("gen string_search --haystack 256 --n-needles 2 -o " + w / "s.trace").code == 0);

  const auto ok = cli::run("sim -c " + w / "cfg.json" + " -t " + w / "s.trace");
  CHECK(ok.code == 0);
  const json r = json::parse(ok.out);
  CHECK(r.at("roi_cycles").get<std::uint64_t>() > 0);
  CHECK(r.at("roi_cycles").get<std::uint64_t>() < r.at("total_cycles").get<std::uint64_t>());
  CHECK(r.contains("stall_cycles"));

  const json plain = json::parse(cli::run("sim -c " + w / "cfg.json" + " -t " + w / "plain.trace").out);
  CHECK(plain.at("roi_cycles") == plain.at("total_cycles"));

  CHECK(cli::run("sim -c " + w / "bad.json" + " -t " + w / "s.trace").code == 2);
  CHECK(cli::run("sim -c " + w / "broken.json" + " -t " + w / "s.trace").code == 2);
  CHECK(cli::run("sim -c " + w / "missing.json" + " -t " + w / "s.trace").code == 2);
  CHECK(cli::run("sim -c " + w / "cfg.json" + " -t " + w / "missing.trace").code == 2);
  CHECK(cli::run("sim -c " + w / "cfg.json" + " -t " + w / "garbled.trace").code == 2);
  CHECK(cli::run("sim -t " + w / "s.trace").code == 2);
}

TEST_CASE("sweep") {
  Workdir w("sweep");
  w.write("cfg.json", kSmallConfig);
  const auto r = cli::run("sweep -c " + w / "cfg.json" + " -a rob --values 16,32,64 -o " + w / "out");
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("sweep").at("points").size() == 3);
  CHECK(fs::exists(w / "out/sweep_rob.csv"));
  CHECK(fs::exists(w / "out/sweep_rob.dat"));
  CHECK(cli::run("sweep -c " + w / "cfg.json" + " -a width -o " + w / "out").code == 2);
  CHECK(cli::run("sweep -c " + w / "cfg.json" + " -a rob --values 16,x -o " + w / "out").code == 2);
}

TEST_CASE("explore writes everything under the output directory, deterministically") {
  Workdir w("explore");
  w.write("cfg.json", kSmallConfig);
  const auto a = cli::run("explore -c " + w / "cfg.json" + " -j 1 -o " + w / "a");
  REQUIRE(a.code == 0);
  const auto b = cli::run("explore -c " + w / "cfg.json" + " -j 4 -o " + w / "b");
  REQUIRE(b.code == 0);
  std::size_t files = 0, per_bench = 0;
  for (const auto& e : fs::directory_iterator(w.path / "a")) {
    ++files;
    const std::string name = e.path().filename().string();
    if (name.rfind("cache_", 0) == 0) ++per_bench;
    CHECK(slurp(e.path()) == slurp(w.path / "b" / name));
  }
  CHECK(per_bench == 2);
  CHECK(files == 2 + 1 + 3 + 5 + 1);
  // Nothing else was written next to the config.
  std::size_t top = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(w.path)) ++top;
  CHECK(top == 3);

  const auto rep = cli::run("report -i " + w / "a/explore.json" + " -o " + w / "r");
  CHECK(rep.code == 0);
  CHECK(slurp(w.path / "r" / "sweep_rob.csv") == slurp(w.path / "a" / "sweep_rob.csv"));
  CHECK(cli::run("report -i " + w / "nope.json").code == 2);
}

TEST_CASE("explore on one-point grids reports zero penalties") {
  Workdir w("explore1");
  w.write("cfg.json", kOnePointConfig);
  REQUIRE(cli::run("explore -c " + w / "cfg.json" + " -o " + w / "out").code == 0);
  const std::string csv = slurp(w.path / "out" / "sweep_iq.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");
}

TEST_CASE("explore failures") {
  Workdir w("explore_fail");
  CHECK(cli::run("explore -c " + w / "missing.json").code == 2);
  w.write("stage.json", R"({
    "benchmarks": [{"kernel": "dijkstra", "params": {"n_nodes": 4}}],
    "grids": {"l1_kb": [64], "l2_kb": [128], "phys_regs": [20]}
  })");
  CHECK(cli::run("explore -c " + w / "stage.json" + " -o " + w / "out").code == 1);
}
