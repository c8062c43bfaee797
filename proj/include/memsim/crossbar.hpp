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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "memsim/device_model.hpp"
#include "memsim/matrix.hpp"
#include "memsim/rng.hpp"

namespace memsim {

/// Peripheral converters and the output stage of a tile.
///
/// Normalized MVM output is measured in units of (full-scale input) x
/// (full-scale weight), i.e. y_norm = sum_i x_i/s_in * w_ij/max|W|. The ADC
/// clips at +-output_clip in those units. When any output would clip, the
/// input is halved and the MVM repeated, up to max_bound_iterations times.
struct ConverterSpec {
  int dac_bits = 7;
  int adc_bits = 9;
  double input_clip = 1.0;
  double output_clip = 12.0;
  double output_noise_std = 0.01;
  int max_bound_iterations = 8;

  void validate() const;

  /// High-resolution converters with no output noise.
  static ConverterSpec ideal(int bits = 16);

  friend bool operator==(const ConverterSpec&, const ConverterSpec&) = default;
};

struct ConductancePair {
  double g_plus = 0.0;
  double g_minus = 0.0;
  friend bool operator==(const ConductancePair&, const ConductancePair&) = default;
};

enum class DeviceSide : std::uint8_t { Plus = 0, Minus = 1 };

struct TileShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t slices = 1;

  std::size_t pair_count() const noexcept { return rows * cols * slices; }
  /// Two devices (plus/minus) per slice of every weight.
  std::size_t device_count() const noexcept { return 2 * pair_count(); }
  std::size_t pair_index(std::size_t r, std::size_t c, std::size_t s) const noexcept {
    return (r * cols + c) * slices + s;
  }
  friend bool operator==(const TileShape&, const TileShape&) = default;
};

/// Stuck-at-g_min flags, one per physical device. Device index is
/// 2 * pair_index + side.
class FaultMask {
 public:
  FaultMask() = default;
  explicit FaultMask(TileShape shape);

  const TileShape& shape() const noexcept { return shape_; }
  std::size_t count() const noexcept { return count_; }
  bool none() const noexcept { return count_ == 0; }

  bool stuck(std::size_t device) const noexcept { return flags_[device] != 0; }
  bool stuck(std::size_t r, std::size_t c, std::size_t s, DeviceSide side) const noexcept {
    return stuck(2 * shape_.pair_index(r, c, s) + static_cast<std::size_t>(side));
  }
  void set(std::size_t device, bool value);
  void set(std::size_t r, std::size_t c, std::size_t s, DeviceSide side, bool value) {
    set(2 * shape_.pair_index(r, c, s) + static_cast<std::size_t>(side), value);
  }

  std::vector<std::size_t> stuck_devices() const;
  bool subset_of(const FaultMask& other) const;

  friend bool operator==(const FaultMask&, const FaultMask&) = default;

 private:
  TileShape shape_;
  std::vector<std::uint8_t> flags_;
  std::size_t count_ = 0;
};

/// A weight block stored as sliced differential conductance pairs. All
/// slices of a weight share the same target; slice outputs are averaged.
struct CrossbarTile {
  TileShape shape;
  std::vector<ConductancePair> targets;     // pre-noise, indexed by pair_index
  std::vector<ConductancePair> programmed;  // after programming noise
  std::vector<double> nu;                   // drift exponent per device
  double weight_scale = 1.0;                // uS per unit weight
  DeviceModelSpec spec;
  ConverterSpec converters;
  FaultMask fault_mask;
  double ir_drop_r = 0.0;  // ohm per cell, 0 disables

  /// Conductance a noise-free read returns at time t; stuck devices read g_min.
  double mean_read(std::size_t device, double t) const;
};

/// Maps W (rows = inputs, cols = outputs) to a tile with
/// weight_scale = (g_max - g_min) / max|W|. Every device of every slice is
/// programmed independently. Rows are programmed from counter-derived
/// sub-streams so the result does not depend on the thread count.
CrossbarTile map_weights(const Matrix& weights, const DeviceModelSpec& spec,
                         const ConverterSpec& converters, std::size_t slices, Rng& rng,
                         double ir_drop_r = 0.0);

/// Re-programs an existing tile from new weights, keeping its fault mask.
void reprogram_tile(CrossbarTile& tile, const Matrix& weights, Rng& rng);

/// Symmetric uniform quantizer with 2^bits - 1 levels over [-clip, clip]
/// (0 and +-clip are levels). Rounds half away from zero.
double quantize(double x, int bits, double clip);

/// Exactly round(ratio * device_count) devices, uniformly without replacement.
FaultMask sample_fault_mask(TileShape shape, double ratio, Rng& rng);

/// Noise-free weight readback at time t including drift and faults.
Matrix effective_weights(const CrossbarTile& tile, double t);

/// Precomputed noise-free readout of a tile at a fixed drift time. `mean`
/// holds normalized effective weights (including IR-drop attenuation) and
/// `var` the read-noise variance each weight contributes per unit input
/// squared. Both are rows x cols, row-major.
struct TileReadout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mean;
  std::vector<double> var;
  double output_scale = 1.0;  // weight units per normalized unit
  ConverterSpec converters;
};

TileReadout make_readout(const CrossbarTile& tile, double t);

/// Literal per-device MVM: each device is read with its own noise draw.
std::vector<double> mvm_reference(const CrossbarTile& tile, std::span<const double> x,
                                  double t, Rng& rng);

/// Fast MVM on a readout. Device read noise is summed analytically per
/// column (a sum of independent Gaussians), so one draw per column
/// reproduces the distribution of the per-device pipeline.
std::vector<double> mvm(const TileReadout& readout, std::span<const double> x, Rng& rng);

inline std::vector<double> mvm(const CrossbarTile& tile, std::span<const double> x, double t,
                               Rng& rng) {
  return mvm(make_readout(tile, t), x, rng);
}

}  // namespace memsim
