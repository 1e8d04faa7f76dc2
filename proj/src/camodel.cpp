#include "uarch/camodel.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace uarch {

std::string access_type_name(AccessType t) {
  return t == AccessType::fast ? "fast" : "normal_serial";
}

AccessType parse_access_type(const std::string& s) {
  if (s == "fast") return AccessType::fast;
  if (s == "normal_serial" || s == "normal/serial" || s == "normal" || s == "serial") {
    return AccessType::normal_serial;
  }
  throw std::invalid_argument(fmt::format("unknown cache access type '{}'", s));
}

void check_geometry(const CacheGeometry& g) {
  if (g.capacity_bytes == 0) throw GeometryError("cache capacity must be positive");
  if (g.line_bytes == 0 || !std::has_single_bit(g.line_bytes)) {
    throw GeometryError(fmt::format("line size {} is not a power of two", g.line_bytes));
  }
  if (g.associativity == 0) throw GeometryError("associativity must be at least 1");
  if (g.banks == 0) throw GeometryError("bank count must be at least 1");
  if (g.rw_ports == 0) throw GeometryError("read/write port count must be at least 1");
  if (g.tech_nm == 0) throw GeometryError("technology node must be positive");
  const std::uint64_t way_bytes = std::uint64_t{g.line_bytes} * g.associativity;
  if (g.capacity_bytes % way_bytes != 0) {
    throw GeometryError(fmt::format("capacity {} not divisible by line*assoc = {}",
                                    g.capacity_bytes, way_bytes));
  }
}

DelayOverrides DelayOverrides::parse_csv(std::istream& in) {
  DelayOverrides out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "capacity_bytes,assoc,type,access_ns") {
        throw std::invalid_argument(
            fmt::format("override header must be 'capacity_bytes,assoc,type,access_ns', got '{}'", line));
      }
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 4) {
      throw std::invalid_argument(fmt::format("override line {}: expected 4 columns", lineno));
    }
    try {
      std::size_t used = 0;
      const auto cap = std::stoull(cols[0], &used);
      if (used != cols[0].size()) throw std::invalid_argument("capacity");
      const auto assoc = std::stoul(cols[1], &used);
      if (used != cols[1].size()) throw std::invalid_argument("assoc");
      const double ns = std::stod(cols[3], &used);
      if (used != cols[3].size() || !(ns > 0.0)) throw std::invalid_argument("access_ns");
      out.set(cap, static_cast<std::uint32_t>(assoc), parse_access_type(cols[2]), ns);
    } catch (const std::exception& e) {
      throw std::invalid_argument(fmt::format("override line {}: bad value ({})", lineno, e.what()));
    }
  }
  if (!header) throw std::invalid_argument("override file is empty");
  return out;
}

DelayOverrides DelayOverrides::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open delay override file '{}'", path));
  return parse_csv(in);
}

void DelayOverrides::set(std::uint64_t capacity, std::uint32_t assoc, AccessType type, double ns) {
  table_[{capacity, assoc, type}] = ns;
}

std::optional<double> DelayOverrides::find(const CacheGeometry& g) const {
  auto it = table_.find({g.capacity_bytes, g.associativity, g.access_type});
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

double CacheTimingModel::access_time_ns(const CacheGeometry& g) const {
  check_geometry(g);
  if (auto hit = overrides_.find(g)) return *hit;
  const auto& c = constants_;
  const double per_bank = static_cast<double>(g.capacity_bytes) / g.banks;
  double ns = c.t0_ns + c.alpha_ns_per_sqrt_byte * std::sqrt(per_bank) +
              c.beta_ns * std::log2(static_cast<double>(g.associativity));
  if (g.access_type == AccessType::normal_serial) ns *= c.serial_factor;
  return ns * (g.tech_nm / 90.0);
}

double CacheTimingModel::area_mm2(const CacheGeometry& g) const {
  check_geometry(g);
  const double scale = g.tech_nm / 90.0;
  const double um2 = static_cast<double>(g.capacity_bytes) * 8.0 * constants_.cell_area_um2 *
                     scale * scale * constants_.area_overhead;
  return um2 * 1e-6;
}

CacheTiming CacheTimingModel::timing(const CacheGeometry& g, double clock_ghz) const {
  CacheTiming t;
  t.access_ns = access_time_ns(g);
  t.access_cycles = to_cycles(t.access_ns, clock_ghz);
  t.area_mm2 = area_mm2(g);
  return t;
}

std::uint32_t to_cycles(double ns, double clock_ghz) {
  if (!(ns > 0.0)) throw std::invalid_argument("access time must be positive");
  if (!(clock_ghz > 0.0)) throw std::invalid_argument("clock frequency must be positive");
  const double c = std::ceil(ns * clock_ghz);
  return c < 1.0 ? 1u : static_cast<std::uint32_t>(c);
}

}  // namespace uarch
