// Trace emission helpers shared by the kernel generators.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "uarch/kernels.hpp"
#include "uarch/trace.hpp"

namespace uarch::kernels {

using Sid = std::uint32_t;

// Handle to the value currently held in a logical register. A handle goes
// stale once its register is reassigned; using a stale handle is a kernel bug.
struct Reg {
  std::uint8_t idx = 0;
  std::uint32_t gen = 0;
};

class Emitter {
 public:
  explicit Emitter(std::string name);

  Sid site() { return next_sid_++; }

  // Long-lived register taken from the top of the file (r31 downward);
  // temporaries round-robin over the registers below the lowest pin.
  Reg pin();
  // r0 is never written by kernels; it serves as the zero/absolute base.
  Reg zero() const { return {0, gen_[0]}; }

  Reg alu(Sid s, Reg a) { return op(Kind::alu, s, a, std::nullopt); }
  Reg alu(Sid s, Reg a, Reg b) { return op(Kind::alu, s, a, b); }
  Reg mul(Sid s, Reg a) { return op(Kind::mul, s, a, std::nullopt); }
  Reg mul(Sid s, Reg a, Reg b) { return op(Kind::mul, s, a, b); }
  Reg div(Sid s, Reg a) { return op(Kind::div, s, a, std::nullopt); }

  // In-place forms overwrite dst's register and refresh the handle.
  void alu_into(Sid s, Reg& dst, Reg a) { op_into(Kind::alu, s, dst, a, std::nullopt); }
  void alu_into(Sid s, Reg& dst, Reg a, Reg b) { op_into(Kind::alu, s, dst, a, b); }
  void mul_into(Sid s, Reg& dst, Reg a) { op_into(Kind::mul, s, dst, a, std::nullopt); }

  Reg load(Sid s, Reg base, std::uint64_t addr, std::uint8_t size);
  void load_into(Sid s, Reg& dst, Reg base, std::uint64_t addr, std::uint8_t size);
  void store(Sid s, Reg data, Reg base, std::uint64_t addr, std::uint8_t size);
  void branch(Sid s, Reg a, bool taken);
  void branch(Sid s, Reg a, Reg b, bool taken);

  void roi_begin();
  void roi_end();

  Trace finish();

 private:
  std::uint8_t check(Reg r) const;
  Reg fresh();
  Reg op(Kind k, Sid s, Reg a, std::optional<Reg> b);
  void op_into(Kind k, Sid s, Reg& dst, Reg a, std::optional<Reg> b);
  void define(Reg& r);

  Trace trace_;
  Sid next_sid_ = 0;
  std::uint32_t gen_[kLogicalRegs] = {};
  std::uint8_t lowest_pin_ = kLogicalRegs;
  std::uint8_t next_temp_ = 1;
  bool temps_used_ = false;
};

// Bump allocator for a kernel's data structures; regions never overlap.
class AddressMap {
 public:
  explicit AddressMap(std::uint64_t base = 0x100000) : next_(base) {}
  Region alloc(std::string name, std::uint64_t bytes, std::uint64_t align = 64);
  KernelLayout layout() const { return layout_; }

 private:
  std::uint64_t next_;
  KernelLayout layout_;
};

// Portable bounded draw; std distributions differ between standard libraries.
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

}  // namespace uarch::kernels
