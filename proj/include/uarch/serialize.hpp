// JSON forms of the public types. Readers are strict: unknown keys and
// mistyped values raise ConfigError; absent keys keep their defaults.

#pragma once

#include <string>

#include "json.hpp"
#include "uarch/core.hpp"
#include "uarch/dse.hpp"
#include "uarch/kernels.hpp"

namespace uarch {

using nlohmann::json;

void to_json(json& j, const LevelStats& s);
void to_json(json& j, const CacheStats& s);
void to_json(json& j, const StallCycles& s);
void to_json(json& j, const BranchStats& s);
void to_json(json& j, const SimResult& r);
void to_json(json& j, const Latencies& l);
void to_json(json& j, const CoreConfig& c);
void to_json(json& j, const CacheParams& c);
void to_json(json& j, const MachineConfig& m);
void to_json(json& j, const KernelSpec& k);
void to_json(json& j, const Grids& g);
void to_json(json& j, const SweepPoint& p);
void to_json(json& j, const SweepResult& r);
void to_json(json& j, const ExtractionResult& e);
void to_json(json& j, const StageReport& s);
void to_json(json& j, const ExploreReport& r);

void from_json(const json& j, LevelStats& s);
void from_json(const json& j, CacheStats& s);
void from_json(const json& j, StallCycles& s);
void from_json(const json& j, BranchStats& s);
void from_json(const json& j, SimResult& r);
void from_json(const json& j, Latencies& l);
void from_json(const json& j, CoreConfig& c);
void from_json(const json& j, CacheParams& c);
void from_json(const json& j, MachineConfig& m);
void from_json(const json& j, KernelSpec& k);
void from_json(const json& j, Grids& g);
void from_json(const json& j, SweepPoint& p);
void from_json(const json& j, SweepResult& r);
void from_json(const json& j, ExtractionResult& e);
void from_json(const json& j, StageReport& s);
void from_json(const json& j, ExploreReport& r);

// Canonical single-line encoding, stable across runs.
std::string canonical(const MachineConfig& m);

}  // namespace uarch
