#include "emitter.hpp"

#include <fmt/format.h>

namespace uarch::kernels {

Emitter::Emitter(std::string name) { trace_.name = std::move(name); }

Reg Emitter::pin() {
  if (temps_used_) throw std::logic_error("registers must be pinned before temporaries are used");
  if (lowest_pin_ <= 8) throw std::logic_error("too many pinned registers");
  --lowest_pin_;
  return {lowest_pin_, gen_[lowest_pin_]};
}

std::uint8_t Emitter::check(Reg r) const {
  if (r.idx >= kLogicalRegs || gen_[r.idx] != r.gen) {
    throw std::logic_error(fmt::format("kernel '{}' read stale register r{}", trace_.name, r.idx));
  }
  return r.idx;
}

void Emitter::define(Reg& r) {
  if (r.idx == 0) throw std::logic_error("r0 is reserved");
  r.gen = ++gen_[r.idx];
}

Reg Emitter::fresh() {
  temps_used_ = true;
  Reg r{next_temp_, 0};
  next_temp_ = static_cast<std::uint8_t>(next_temp_ + 1 >= lowest_pin_ ? 1 : next_temp_ + 1);
  define(r);
  return r;
}

Reg Emitter::op(Kind k, Sid s, Reg a, std::optional<Reg> b) {
  InstructionRecord rec;
  rec.sid = s;
  rec.kind = k;
  rec.src1 = check(a);
  if (b) rec.src2 = check(*b);
  Reg d = fresh();
  rec.dst = d.idx;
  trace_.records.push_back(rec);
  return d;
}

void Emitter::op_into(Kind k, Sid s, Reg& dst, Reg a, std::optional<Reg> b) {
  InstructionRecord rec;
  rec.sid = s;
  rec.kind = k;
  rec.src1 = check(a);
  if (b) rec.src2 = check(*b);
  define(dst);
  rec.dst = dst.idx;
  trace_.records.push_back(rec);
}

Reg Emitter::load(Sid s, Reg base, std::uint64_t addr, std::uint8_t size) {
  InstructionRecord rec;
  rec.sid = s;
  rec.kind = Kind::load;
  rec.src1 = check(base);
  rec.addr = addr;
  rec.size = size;
  Reg d = fresh();
  rec.dst = d.idx;
  trace_.records.push_back(rec);
  return d;
}

void Emitter::load_into(Sid s, Reg& dst, Reg base, std::uint64_t addr, std::uint8_t size) {
  InstructionRecord rec;
  rec.sid = s;
  rec.kind = Kind::load;
  rec.src1 = check(base);
  rec.addr = addr;
  rec.size = size;
  define(dst);
  rec.dst = dst.idx;
  trace_.records.push_back(rec);
}

void Emitter::store(Sid s, Reg data, Reg base, std::uint64_t addr, std::uint8_t size) {
  InstructionRecord rec;
  rec.sid = s;
  rec.kind = Kind::store;
  rec.src1 = check(data);
  rec.src2 = check(base);
  rec.addr = addr;
  rec.size = size;
  trace_.records.push_back(rec);
}

void Emitter::branch(Sid s, Reg a, bool taken) {
  InstructionRecord rec;
  rec.sid = s;
  rec.kind = Kind::branch;
  rec.src1 = check(a);
  rec.taken = taken;
  trace_.records.push_back(rec);
}

void Emitter::branch(Sid s, Reg a, Reg b, bool taken) {
  InstructionRecord rec;
  rec.sid = s;
  rec.kind = Kind::branch;
  rec.src1 = check(a);
  rec.src2 = check(b);
  rec.taken = taken;
  trace_.records.push_back(rec);
}

void Emitter::roi_begin() {
  if (trace_.roi_begin) throw std::logic_error("ROI opened twice");
  trace_.roi_begin = trace_.records.size();
}

void Emitter::roi_end() {
  if (!trace_.roi_begin || trace_.roi_end) throw std::logic_error("unbalanced ROI");
  trace_.roi_end = trace_.records.size();
}

Trace Emitter::finish() {
  if (trace_.roi_begin && !trace_.roi_end) throw std::logic_error("ROI left open");
  return std::move(trace_);
}

Region AddressMap::alloc(std::string name, std::uint64_t bytes, std::uint64_t align) {
  next_ = (next_ + align - 1) / align * align;
  Region r{std::move(name), next_, bytes};
  next_ += bytes == 0 ? align : bytes;
  layout_.regions.push_back(r);
  return r;
}

}  // namespace uarch::kernels
