// Per-kernel generators. Each takes a spec already passed through
// resolve_kernel_spec.

#pragma once

#include "uarch/kernels.hpp"

namespace uarch::kernels {

Trace gen_dijkstra(const KernelSpec& spec, KernelLayout* layout);
Trace gen_string_search(const KernelSpec& spec, KernelLayout* layout);
Trace gen_susan_corners(const KernelSpec& spec, KernelLayout* layout);
Trace gen_flow_class(const KernelSpec& spec, KernelLayout* layout);
Trace gen_ipv4_trie(const KernelSpec& spec, KernelLayout* layout);
Trace gen_ipsec_aes(const KernelSpec& spec, KernelLayout* layout);

}  // namespace uarch::kernels
