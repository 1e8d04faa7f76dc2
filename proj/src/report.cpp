#include "uarch/report.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "uarch/serialize.hpp"

namespace uarch {

namespace fs = std::filesystem;

namespace {

double avg_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void save(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportIoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  out.close();
  if (!out) throw ReportIoError(fmt::format("error writing '{}'", path.string()));
}

template <typename F>
std::string render(F&& f) {
  std::ostringstream s;
  f(s);
  return s.str();
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ReportIoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
}

std::string csv_name(const SweepResult& r) { return fmt::format("sweep_{}.csv", r.axis); }

}  // namespace

void write_csv(std::ostream& out, const std::vector<SweepResult>& results) {
  out << kCsvHeader << '\n';
  for (const auto& r : results) {
    for (const auto& p : r.points) {
      const std::string label = p.label();
      std::vector<double> cycles;
      for (std::size_t b = 0; b < r.benchmarks.size(); ++b) {
        fmt::print(out, "{},{},{},{},{},{}\n", r.axis, label, r.benchmarks[b], p.roi_cycles[b], p.ipc_roi[b],
                   p.per_pen[b]);
        cycles.push_back(static_cast<double>(p.roi_cycles[b]));
      }
      fmt::print(out, "{},{},AVG,{},{},{}\n", r.axis, label, avg_of(cycles), avg_of(p.ipc_roi), p.avg_per_pen);
    }
  }
}

std::string csv_string(const std::vector<SweepResult>& results) {
  return render([&](std::ostream& o) { write_csv(o, results); });
}

void write_dat(std::ostream& out, const SweepResult& r) {
  out << "# " << r.axis;
  for (const auto& b : r.benchmarks) out << ' ' << b;
  out << " avg\n";
  for (const auto& p : r.points) {
    out << p.label();
    for (double x : p.per_pen) fmt::print(out, " {:.4f}", x);
    fmt::print(out, " {:.4f}\n", p.avg_per_pen);
  }
}

void write_cache_dat(std::ostream& out, const SweepResult& r, std::size_t benchmark) {
  fmt::print(out, "# {} l1_kb l2_kb per_pen avg\n", r.benchmarks.at(benchmark));
  for (const auto& p : r.points) {
    fmt::print(out, "{} {} {:.4f} {:.4f}\n", p.value, p.l2_kb.value_or(0), p.per_pen.at(benchmark), p.avg_per_pen);
  }
}

std::vector<std::string> write_sweep_outputs(const SweepResult& r, const fs::path& dir) {
  make_dir(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    save(dir / name, text);
    files.push_back(name);
  };
  emit(csv_name(r), csv_string({r}));
  emit(fmt::format("sweep_{}.json", r.axis), json(r).dump(2) + "\n");
  emit(fmt::format("sweep_{}.dat", r.axis), render([&](std::ostream& o) { write_dat(o, r); }));
  return files;
}

std::vector<std::string> write_explore_outputs(const ExploreReport& rep, const fs::path& dir) {
  make_dir(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    save(dir / name, text);
    files.push_back(name);
  };
  std::vector<const StageReport*> stages{&rep.cache, &rep.phys_regs};
  for (const auto& s : rep.window) stages.push_back(&s);
  for (const auto* s : stages) emit(csv_name(s->sweep), csv_string({s->sweep}));
  emit("explore.json", json(rep).dump(2) + "\n");

  const SweepResult& cache = rep.cache.sweep;
  for (std::size_t b = 0; b < cache.benchmarks.size(); ++b) {
    emit(fmt::format("cache_{}.dat", cache.benchmarks[b]),
         render([&](std::ostream& o) { write_cache_dat(o, cache, b); }));
  }
  emit("regfile_phys_regs.dat", render([&](std::ostream& o) { write_dat(o, rep.phys_regs.sweep); }));
  for (const auto& s : rep.window) {
    emit(fmt::format("window_{}.dat", s.sweep.axis), render([&](std::ostream& o) { write_dat(o, s.sweep); }));
  }
  return files;
}

}  // namespace uarch
