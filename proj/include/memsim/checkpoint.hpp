// Copyright 2026 The memsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Network checkpoint, format version 1.
//
//   offset 0   8 bytes   magic "MEMSIMCK"
//   offset 8   u32 LE    format version
//   offset 12  u64 LE    header length H
//   offset 20  H bytes   JSON header (UTF-8)
//   offset 20+H          payload: raw little-endian arrays
//
// The header carries the network spec, analog config, device preset name,
// seed lineage and an "arrays" directory of {name, dtype, count, offset}
// entries (offset relative to the payload start, dtype "f64" or "u8").
// Arrays: layer<L>.weights (row-major fan_in x fan_out), layer<L>.bias and,
// for programmed networks, tile<L>.<K>.{targets,programmed,nu,faults}.
// Conductance pairs are stored interleaved (g_plus, g_minus).

#include <cstdint>
#include <filesystem>
#include <string>

#include "memsim/network.hpp"

namespace memsim {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct SeedLineage {
  std::uint64_t master_seed = 0;
  std::string path;         // e.g. "analog_train/pcm"
  std::string fingerprint;  // configuration the network was produced with
};

struct Checkpoint {
  AnalogNetwork net;
  SeedLineage lineage;
};

void save_checkpoint(const AnalogNetwork& net, const SeedLineage& lineage,
                     const std::filesystem::path& path);
/// Throws std::runtime_error on a malformed file or version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace memsim
