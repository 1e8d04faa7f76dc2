// Desk-scale embedded kernels that run their algorithm natively and emit
// the dynamic instruction trace the algorithm would execute.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "uarch/trace.hpp"

namespace uarch {

struct KernelSpec {
  std::string kernel;
  std::map<std::string, std::int64_t> params;  // missing entries take defaults
  std::uint64_t seed = 1;
};

struct KernelParam {
  std::string name;
  std::int64_t default_value;
  std::int64_t min_value;
  std::int64_t max_value;
  std::string description;
};

struct KernelDescriptor {
  std::string name;
  std::string summary;
  std::vector<KernelParam> params;

  std::map<std::string, std::int64_t> defaults() const;
};

class KernelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Address ranges of the data structures a kernel touches.
struct Region {
  std::string name;
  std::uint64_t base = 0;
  std::uint64_t bytes = 0;

  std::uint64_t end() const { return base + bytes; }
  bool contains(std::uint64_t addr) const { return addr >= base && addr < end(); }
};

struct KernelLayout {
  std::vector<Region> regions;
  const Region& region(const std::string& name) const;
};

const std::vector<KernelDescriptor>& list_kernels();
const KernelDescriptor& find_kernel(const std::string& name);

// Fills in defaults and checks ranges. Throws KernelError.
KernelSpec resolve_kernel_spec(const KernelSpec& spec);

Trace gen_kernel(const KernelSpec& spec, KernelLayout* layout = nullptr);

namespace kernels {

// Inputs the string_search kernel generates from its spec.
struct StringSearchInput {
  std::string haystack;
  std::vector<std::string> needles;
};
StringSearchInput string_search_input(const KernelSpec& spec);

using AesBlock = std::array<std::uint8_t, 16>;
using AesKey = std::array<std::uint8_t, 16>;
std::array<std::uint8_t, 176> aes128_expand_key(const AesKey& key);
AesBlock aes128_encrypt_block(const AesKey& key, const AesBlock& plaintext);

}  // namespace kernels

}  // namespace uarch
