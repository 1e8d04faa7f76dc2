// Abstract trace instruction set and its text file format.
//
// A trace is the committed dynamic instruction stream of one kernel run.
// Static instructions are identified by a sid; the instruction cache sees
// them at byte address sid * 4.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uarch {

inline constexpr int kLogicalRegs = 32;

enum class Kind : std::uint8_t { alu, mul, div, load, store, branch };

std::string_view kind_name(Kind k);

struct InstructionRecord {
  std::uint32_t sid = 0;
  Kind kind = Kind::alu;
  std::optional<std::uint8_t> dst;
  std::optional<std::uint8_t> src1;  // LOAD: address base; STORE: data
  std::optional<std::uint8_t> src2;  // STORE: address base
  std::optional<std::uint64_t> addr;
  std::optional<std::uint8_t> size;
  std::optional<bool> taken;

  std::uint64_t pc() const { return std::uint64_t{sid} * 4; }
  bool is_mem() const { return kind == Kind::load || kind == Kind::store; }

  friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

// Records in commit order plus an optional region-of-interest window.
// roi_begin / roi_end are marker positions expressed as the number of
// records that precede the marker.
struct Trace {
  std::string name;
  std::vector<InstructionRecord> records;
  std::optional<std::size_t> roi_begin;
  std::optional<std::size_t> roi_end;

  bool has_roi() const { return roi_begin.has_value(); }
  std::size_t roi_size() const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& reason);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Violation {
  std::size_t index;  // record index, or records.size() for trace-level problems
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

Trace parse_trace(std::istream& in);
Trace parse_trace_string(std::string_view text);
Trace read_trace_file(const std::string& path);

void write_trace(const Trace& trace, std::ostream& out);
std::string write_trace_string(const Trace& trace);
void write_trace_file(const Trace& trace, const std::string& path);

std::vector<Violation> validate_record(const InstructionRecord& rec);
std::vector<Violation> validate_trace(const Trace& trace);

}  // namespace uarch
