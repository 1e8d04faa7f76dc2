// Report emission: per-axis CSV, the combined JSON report and plot-ready
// whitespace-separated .dat tables.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "uarch/dse.hpp"

namespace uarch {

inline constexpr const char* kCsvHeader = "axis,value,benchmark,roi_cycles,ipc_roi,per_pen";

// One row per (point, benchmark) plus an AVG row per point.
void write_csv(std::ostream& out, const std::vector<SweepResult>& results);
std::string csv_string(const std::vector<SweepResult>& results);

// Columns: size, per_pen per benchmark, avg.
void write_dat(std::ostream& out, const SweepResult& r);
// Joint cache sweep for one benchmark. Columns: l1_kb l2_kb per_pen avg.
void write_cache_dat(std::ostream& out, const SweepResult& r, std::size_t benchmark);

// Writes every artifact of an explore run into dir and returns the file
// names in the order written.
std::vector<std::string> write_explore_outputs(const ExploreReport& rep, const std::filesystem::path& dir);
std::vector<std::string> write_sweep_outputs(const SweepResult& r, const std::filesystem::path& dir);

class ReportIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uarch
