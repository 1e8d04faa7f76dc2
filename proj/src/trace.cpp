#include "uarch/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace uarch {

namespace {

constexpr std::string_view kNameDirective = "# trace:";

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_uint(std::string_view tok, T& out, int base = 10) {
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out, base);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

class LineParser {
 public:
  explicit LineParser(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& why) const { throw TraceParseError(line_, why); }

  std::optional<std::uint8_t> reg(std::string_view tok, bool allow_absent) const {
    if (tok == "-") {
      if (!allow_absent) fail("register operand required");
      return std::nullopt;
    }
    if (tok.size() < 2 || tok[0] != 'r') fail(fmt::format("expected register, got '{}'", tok));
    unsigned n = 0;
    if (!parse_uint(tok.substr(1), n)) fail(fmt::format("expected register, got '{}'", tok));
    if (n >= kLogicalRegs) fail(fmt::format("register out of range: '{}'", tok));
    return static_cast<std::uint8_t>(n);
  }

  std::uint64_t address(std::string_view tok) const {
    std::uint64_t a = 0;
    if (tok.size() < 3 || tok[0] != '0' || (tok[1] != 'x' && tok[1] != 'X') ||
        !parse_uint(tok.substr(2), a, 16)) {
      fail(fmt::format("malformed address '{}'", tok));
    }
    return a;
  }

  std::uint8_t access_size(std::string_view tok) const {
    unsigned n = 0;
    if (!parse_uint(tok, n) || (n != 1 && n != 2 && n != 4 && n != 8)) {
      fail(fmt::format("access size must be 1, 2, 4 or 8, got '{}'", tok));
    }
    return static_cast<std::uint8_t>(n);
  }

  InstructionRecord record(const std::vector<std::string_view>& tok) const {
    InstructionRecord rec;
    if (!parse_uint(tok[0], rec.sid)) fail(fmt::format("bad static instruction id '{}'", tok[0]));
    if (tok[1].size() != 1) fail(fmt::format("unknown instruction kind '{}'", tok[1]));
    auto expect = [&](std::size_t n) {
      if (tok.size() != n) fail(fmt::format("expected {} fields, got {}", n, tok.size()));
    };
    switch (tok[1][0]) {
      case 'A':
      case 'M':
      case 'D':
        expect(5);
        rec.kind = tok[1][0] == 'A' ? Kind::alu : tok[1][0] == 'M' ? Kind::mul : Kind::div;
        rec.dst = reg(tok[2], false);
        rec.src1 = reg(tok[3], true);
        rec.src2 = reg(tok[4], true);
        break;
      case 'L':
        expect(6);
        rec.kind = Kind::load;
        rec.dst = reg(tok[2], false);
        rec.src1 = reg(tok[3], true);
        rec.addr = address(tok[4]);
        rec.size = access_size(tok[5]);
        break;
      case 'S':
        expect(6);
        rec.kind = Kind::store;
        rec.src1 = reg(tok[2], false);
        rec.src2 = reg(tok[3], true);
        rec.addr = address(tok[4]);
        rec.size = access_size(tok[5]);
        break;
      case 'B':
        expect(5);
        rec.kind = Kind::branch;
        rec.src1 = reg(tok[2], true);
        rec.src2 = reg(tok[3], true);
        if (tok[4] == "T") {
          rec.taken = true;
        } else if (tok[4] == "N") {
          rec.taken = false;
        } else {
          fail(fmt::format("branch outcome must be T or N, got '{}'", tok[4]));
        }
        break;
      default:
        fail(fmt::format("unknown instruction kind '{}'", tok[1]));
    }
    if (auto v = validate_record(rec); !v.empty()) fail(v.front().message);
    return rec;
  }

 private:
  std::size_t line_;
};

std::string reg_str(const std::optional<std::uint8_t>& r) {
  return r ? fmt::format("r{}", *r) : std::string("-");
}

}  // namespace

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::alu: return "ALU";
    case Kind::mul: return "MUL";
    case Kind::div: return "DIV";
    case Kind::load: return "LOAD";
    case Kind::store: return "STORE";
    case Kind::branch: return "BRANCH";
  }
  return "?";
}

std::size_t Trace::roi_size() const {
  if (!roi_begin || !roi_end) return records.size();
  return *roi_end - *roi_begin;
}

TraceParseError::TraceParseError(std::size_t line, const std::string& reason)
    : std::runtime_error(fmt::format("line {}: {}", line, reason)), line_(line) {}

Trace parse_trace(std::istream& in) {
  Trace t;
  std::string raw;
  std::size_t lineno = 0;
  bool seen_begin = false;
  bool seen_end = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (lineno == 1 && line.starts_with(kNameDirective)) {
        t.name = std::string(trim(line.substr(kNameDirective.size())));
      }
      continue;
    }
    LineParser p(lineno);
    auto tok = split_ws(line);
    if (tok[0] == "ROI") {
      if (tok.size() != 2) p.fail("expected 'ROI BEGIN' or 'ROI END'");
      if (tok[1] == "BEGIN") {
        if (seen_begin) p.fail(seen_end ? "more than one ROI pair" : "unbalanced ROI");
        seen_begin = true;
        t.roi_begin = t.records.size();
      } else if (tok[1] == "END") {
        if (!seen_begin || seen_end) p.fail("unbalanced ROI");
        seen_end = true;
        t.roi_end = t.records.size();
      } else {
        p.fail(fmt::format("unknown ROI marker '{}'", tok[1]));
      }
      continue;
    }
    if (tok.size() < 2) p.fail("truncated instruction line");
    t.records.push_back(p.record(tok));
  }
  if (seen_begin && !seen_end) throw TraceParseError(lineno, "unbalanced ROI");
  return t;
}

Trace parse_trace_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open trace '{}'", path));
  return parse_trace(in);
}

void write_trace(const Trace& t, std::ostream& out) {
  if (!t.name.empty()) out << kNameDirective << ' ' << t.name << '\n';
  std::string buf;
  auto markers = [&](std::size_t pos) {
    if (t.roi_begin && *t.roi_begin == pos) out << "ROI BEGIN\n";
    if (t.roi_end && *t.roi_end == pos) out << "ROI END\n";
  };
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    markers(i);
    const auto& r = t.records[i];
    buf.clear();
    auto it = std::back_inserter(buf);
    switch (r.kind) {
      case Kind::alu:
      case Kind::mul:
      case Kind::div: {
        char k = r.kind == Kind::alu ? 'A' : r.kind == Kind::mul ? 'M' : 'D';
        fmt::format_to(it, "{} {} {} {} {}\n", r.sid, k, reg_str(r.dst), reg_str(r.src1),
                       reg_str(r.src2));
        break;
      }
      case Kind::load:
        fmt::format_to(it, "{} L {} {} {:#x} {}\n", r.sid, reg_str(r.dst), reg_str(r.src1),
                       r.addr.value_or(0), r.size.value_or(0));
        break;
      case Kind::store:
        fmt::format_to(it, "{} S {} {} {:#x} {}\n", r.sid, reg_str(r.src1), reg_str(r.src2),
                       r.addr.value_or(0), r.size.value_or(0));
        break;
      case Kind::branch:
        fmt::format_to(it, "{} B {} {} {}\n", r.sid, reg_str(r.src1), reg_str(r.src2),
                       r.taken.value_or(false) ? 'T' : 'N');
        break;
    }
    out << buf;
  }
  markers(t.records.size());
}

std::string write_trace_string(const Trace& t) {
  std::ostringstream out;
  write_trace(t, out);
  return out.str();
}

void write_trace_file(const Trace& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write trace '{}'", path));
  write_trace(t, out);
  if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path));
}

std::vector<Violation> validate_record(const InstructionRecord& r) {
  std::vector<Violation> v;
  auto bad = [&](std::string msg) { v.push_back({0, std::move(msg)}); };
  auto check_reg = [&](const std::optional<std::uint8_t>& reg, const char* what) {
    if (reg && *reg >= kLogicalRegs) bad(fmt::format("{} register r{} out of range", what, *reg));
  };
  check_reg(r.dst, "destination");
  check_reg(r.src1, "source");
  check_reg(r.src2, "source");

  const bool mem = r.is_mem();
  if (!mem && r.addr) bad(fmt::format("{} must not carry an address", kind_name(r.kind)));
  if (!mem && r.size) bad(fmt::format("{} must not carry an access size", kind_name(r.kind)));
  if (r.kind != Kind::branch && r.taken) bad(fmt::format("{} must not carry a branch outcome", kind_name(r.kind)));
  if (mem) {
    if (!r.addr) bad(fmt::format("{} requires an address", kind_name(r.kind)));
    if (!r.size) {
      bad(fmt::format("{} requires an access size", kind_name(r.kind)));
    } else if (*r.size != 1 && *r.size != 2 && *r.size != 4 && *r.size != 8) {
      bad(fmt::format("access size {} not in {{1,2,4,8}}", *r.size));
    } else if (r.addr && *r.addr > std::numeric_limits<std::uint64_t>::max() - (*r.size - 1)) {
      bad("access wraps past the top of the address space");
    }
  }
  switch (r.kind) {
    case Kind::alu:
    case Kind::mul:
    case Kind::div:
      if (!r.dst) bad(fmt::format("{} requires a destination", kind_name(r.kind)));
      if (!r.src1 && !r.src2) bad(fmt::format("{} requires at least one source", kind_name(r.kind)));
      break;
    case Kind::load:
      if (!r.dst) bad("LOAD requires a destination");
      if (r.src2) bad("LOAD takes a single base register");
      break;
    case Kind::store:
      if (r.dst) bad("STORE must not have a destination");
      if (!r.src1) bad("STORE requires a data register");
      break;
    case Kind::branch:
      if (r.dst) bad("BRANCH must not have a destination");
      if (!r.taken) bad("BRANCH requires a taken flag");
      break;
  }
  return v;
}

std::vector<Violation> validate_trace(const Trace& t) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    for (auto& v : validate_record(t.records[i])) out.push_back({i, std::move(v.message)});
  }
  const std::size_t n = t.records.size();
  if (t.roi_begin.has_value() != t.roi_end.has_value()) {
    out.push_back({n, "unbalanced ROI"});
  } else if (t.roi_begin && (*t.roi_begin > *t.roi_end || *t.roi_end > n)) {
    out.push_back({n, "ROI markers out of order or beyond the trace"});
  }
  return out;
}

}  // namespace uarch
