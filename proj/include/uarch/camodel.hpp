// Closed-form cache access-time and area model.
//
// access_ns = (t0 + alpha * sqrt(capacity / banks) + beta * log2(ways)) * serial
// where serial = 1.4 for normal/serial (tag-then-data) arrays and 1.0 for
// fast (parallel tag/data) arrays. Constants are calibrated for 90 nm so a
// 32 KiB 4-way L1 lands near 0.9 ns and a 1 MiB array near 3 ns. Other
// technology nodes scale time linearly and area quadratically.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>

namespace uarch {

enum class AccessType { fast, normal_serial };

std::string access_type_name(AccessType t);
AccessType parse_access_type(const std::string& s);

struct CacheGeometry {
  std::uint64_t capacity_bytes = 32 * 1024;
  std::uint32_t line_bytes = 32;
  std::uint32_t associativity = 4;
  std::uint32_t banks = 1;
  std::uint32_t rw_ports = 1;
  std::uint32_t tech_nm = 90;
  AccessType access_type = AccessType::fast;
  // Accepted for configuration fidelity; no timing effect.
  double temperature_k = 350.0;

  std::uint64_t sets() const { return capacity_bytes / (std::uint64_t{line_bytes} * associativity); }

  friend bool operator==(const CacheGeometry&, const CacheGeometry&) = default;
};

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws GeometryError when an invariant does not hold.
void check_geometry(const CacheGeometry& g);

struct CacheTiming {
  double access_ns = 0.0;
  std::uint32_t access_cycles = 1;
  double area_mm2 = 0.0;
};

struct DelayConstants {
  double t0_ns = 0.35;
  double alpha_ns_per_sqrt_byte = 0.0025;
  double beta_ns = 0.05;
  double serial_factor = 1.4;
  double cell_area_um2 = 1.0;  // per bit at 90 nm
  double area_overhead = 1.35;
};

// Exact-match access-time table keyed by (capacity_bytes, assoc, type).
// CSV header: capacity_bytes,assoc,type,access_ns
class DelayOverrides {
 public:
  static DelayOverrides parse_csv(std::istream& in);
  static DelayOverrides load_csv(const std::string& path);

  void set(std::uint64_t capacity, std::uint32_t assoc, AccessType type, double ns);
  std::optional<double> find(const CacheGeometry& g) const;
  bool empty() const { return table_.empty(); }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::tuple<std::uint64_t, std::uint32_t, AccessType>, double> table_;
};

class CacheTimingModel {
 public:
  CacheTimingModel() = default;
  explicit CacheTimingModel(DelayConstants c, DelayOverrides o = {})
      : constants_(c), overrides_(std::move(o)) {}

  double access_time_ns(const CacheGeometry& g) const;
  double area_mm2(const CacheGeometry& g) const;
  CacheTiming timing(const CacheGeometry& g, double clock_ghz) const;

  const DelayConstants& constants() const { return constants_; }
  const DelayOverrides& overrides() const { return overrides_; }

 private:
  DelayConstants constants_{};
  DelayOverrides overrides_{};
};

std::uint32_t to_cycles(double ns, double clock_ghz);

}  // namespace uarch
