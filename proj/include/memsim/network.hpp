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
#include <string>
#include <string_view>
#include <vector>

#include "memsim/crossbar.hpp"
#include "memsim/device_model.hpp"
#include "memsim/matrix.hpp"
#include "memsim/rng.hpp"

namespace memsim {

enum class Activation { Softplus, Tanh };

std::string to_string(Activation a);
Activation parse_activation(std::string_view name);

double activation(Activation kind, double x);
/// Derivative with respect to the pre-activation.
double activation_grad(Activation kind, double x);

struct NetworkSpec {
  std::vector<std::size_t> layer_sizes{5, 128, 128, 128, 2};
  Activation hidden_activation = Activation::Softplus;
  Activation output_activation = Activation::Tanh;
  bool bias = true;
  /// Glorot limit multiplier for the last layer. A small start keeps the
  /// tanh outputs out of saturation under the scale-invariant cosine loss.
  double output_init_gain = 0.1;

  void validate() const;
  std::size_t layer_count() const noexcept { return layer_sizes.size() - 1; }
  std::size_t input_size() const noexcept { return layer_sizes.front(); }
  std::size_t output_size() const noexcept { return layer_sizes.back(); }
  std::size_t parameter_count() const;
  Activation activation_of(std::size_t layer) const noexcept {
    return layer + 1 == layer_count() ? output_activation : hidden_activation;
  }
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// How a network is mapped onto hardware.
struct AnalogConfig {
  std::string device_preset = "pcm";
  DeviceModelSpec device = pcm_preset();
  ConverterSpec converters;
  std::size_t slices = 8;
  double ir_drop_r = 0.0;
  std::size_t max_tile_rows = 512;

  void validate() const;
  friend bool operator==(const AnalogConfig&, const AnalogConfig&) = default;
};

/// Digital master copy of one layer. weights is fan_in x fan_out.
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;
};

/// A layer's tiles. Layers taller than max_tile_rows are split by rows and
/// partial results summed digitally.
struct AnalogLayer {
  std::vector<CrossbarTile> tiles;
  std::vector<std::size_t> row_offsets;
};

/// Master weights plus their crossbar images. Biases and activations are
/// always digital.
class AnalogNetwork {
 public:
  AnalogNetwork() = default;
  AnalogNetwork(NetworkSpec spec, AnalogConfig analog);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const AnalogConfig& analog() const noexcept { return analog_; }
  void set_analog(AnalogConfig analog);

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  bool programmed() const noexcept { return !tiles_.empty(); }
  const std::vector<AnalogLayer>& tiles() const noexcept { return tiles_; }
  std::vector<AnalogLayer>& tiles() noexcept { return tiles_; }
  void clear_tiles() noexcept { tiles_.clear(); }

  /// Seed of the most recent programming pass, kept for checkpoint lineage.
  std::uint64_t programming_seed = 0;

 private:
  NetworkSpec spec_;
  AnalogConfig analog_;
  std::vector<DenseLayer> layers_;
  std::vector<AnalogLayer> tiles_;
};

/// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
AnalogNetwork make_network(const NetworkSpec& spec, const AnalogConfig& analog, Rng& rng);

/// Per-layer inputs and pre-activations observed during one forward pass.
/// inputs[l] feeds layer l; preacts[l] is its affine output.
struct ForwardTrace {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> preacts;
  std::vector<double> output;
};

/// Readouts of every tile at one drift time, shared by many forward passes.
struct NetworkReadout {
  double t = 0.0;
  std::vector<std::vector<TileReadout>> layers;
};

NetworkReadout make_readout(const AnalogNetwork& net, double t);

std::vector<double> forward_digital(const AnalogNetwork& net, std::span<const double> x);
ForwardTrace trace_digital(const AnalogNetwork& net, std::span<const double> x);

/// Throws std::logic_error when the tiles have not been programmed.
std::vector<double> forward_analog(const AnalogNetwork& net, std::span<const double> x,
                                   double t, Rng& rng);
std::vector<double> forward_analog(const AnalogNetwork& net, const NetworkReadout& readout,
                                   std::span<const double> x, Rng& rng);
ForwardTrace trace_analog(const AnalogNetwork& net, const NetworkReadout& readout,
                          std::span<const double> x, Rng& rng);

/// Rebuilds every tile from the current masters. Existing fault masks are
/// kept (stuck devices stay stuck) and the drift clock restarts at t = 0.
void reprogram(AnalogNetwork& net, Rng& rng);

/// Fault masks of all tiles, flattened in layer then tile order.
std::vector<FaultMask> fault_masks(const AnalogNetwork& net);
void apply_fault_masks(AnalogNetwork& net, const std::vector<FaultMask>& masks);
std::vector<FaultMask> sample_network_faults(const AnalogNetwork& net, double ratio, Rng& rng);

/// Noise-free device readback of every layer's weights at time t.
std::vector<Matrix> effective_weights(const AnalogNetwork& net, double t);

}  // namespace memsim
