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

#include "memsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace memsim {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Softplus:
      return "softplus";
    case Activation::Tanh:
      return "tanh";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "softplus") return Activation::Softplus;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

double activation(Activation kind, double x) {
  switch (kind) {
    case Activation::Softplus:
      if (x > 30.0) return x;
      return std::log1p(std::exp(x));
    case Activation::Tanh:
      return std::tanh(x);
  }
  return x;
}

double activation_grad(Activation kind, double x) {
  switch (kind) {
    case Activation::Softplus:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::Tanh: {
      const double th = std::tanh(x);
      return 1.0 - th * th;
    }
  }
  return 1.0;
}

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 2) throw std::invalid_argument("network: need at least 2 layer sizes");
  for (std::size_t n : layer_sizes) {
    if (n < 1) throw std::invalid_argument("network: layer sizes must be >= 1");
  }
  if (!(output_init_gain > 0.0) || !std::isfinite(output_init_gain)) {
    throw std::invalid_argument("network: output_init_gain must be positive");
  }
}

std::size_t NetworkSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += layer_sizes[l] * layer_sizes[l + 1] + (bias ? layer_sizes[l + 1] : 0);
  }
  return n;
}

void AnalogConfig::validate() const {
  device.validate();
  converters.validate();
  if (slices < 1) throw std::invalid_argument("analog: slices must be >= 1");
  if (max_tile_rows < 1) throw std::invalid_argument("analog: max_tile_rows must be >= 1");
  if (!(ir_drop_r >= 0.0)) throw std::invalid_argument("analog: ir_drop_r must be >= 0");
}

AnalogNetwork::AnalogNetwork(NetworkSpec spec, AnalogConfig analog)
    : spec_(std::move(spec)), analog_(std::move(analog)) {
  spec_.validate();
  analog_.validate();
  layers_.resize(spec_.layer_count());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weights = Matrix(spec_.layer_sizes[l], spec_.layer_sizes[l + 1]);
    layers_[l].bias.assign(spec_.layer_sizes[l + 1], 0.0);
  }
}

void AnalogNetwork::set_analog(AnalogConfig analog) {
  analog.validate();
  analog_ = std::move(analog);
  tiles_.clear();
}

AnalogNetwork make_network(const NetworkSpec& spec, const AnalogConfig& analog, Rng& rng) {
  AnalogNetwork net(spec, analog);
  const std::size_t last = net.layers().size() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    auto& layer = net.layers()[l];
    const double fan = static_cast<double>(layer.weights.rows() + layer.weights.cols());
    const double limit = std::sqrt(6.0 / fan) * (l == last ? spec.output_init_gain : 1.0);
    std::uniform_real_distribution<double> init(-limit, limit);
    for (double& w : layer.weights.data()) w = init(rng);
  }
  return net;
}

namespace {

void check_input(const AnalogNetwork& net, std::span<const double> x) {
  if (x.size() != net.spec().input_size()) {
    throw std::invalid_argument("forward: input length does not match network");
  }
}

void require_tiles(const AnalogNetwork& net) {
  if (!net.programmed()) throw std::logic_error("forward_analog: tiles not programmed");
}

// Finishes a layer: adds the digital bias and records pre-activations and
// the activated output into the trace.
void finish_layer(const AnalogNetwork& net, std::size_t l, std::vector<double>&& z,
                  ForwardTrace& tr) {
  const auto& bias = net.layers()[l].bias;
  if (net.spec().bias) {
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += bias[j];
  }
  std::vector<double> a(z.size());
  const Activation kind = net.spec().activation_of(l);
  for (std::size_t j = 0; j < z.size(); ++j) a[j] = activation(kind, z[j]);
  tr.preacts.push_back(std::move(z));
  if (l + 1 < net.layers().size()) {
    tr.inputs.push_back(std::move(a));
  } else {
    tr.output = std::move(a);
  }
}

}  // namespace

ForwardTrace trace_digital(const AnalogNetwork& net, std::span<const double> x) {
  check_input(net, x);
  ForwardTrace tr;
  tr.inputs.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const Matrix& w = net.layers()[l].weights;
    const std::vector<double>& in = tr.inputs[l];
    std::vector<double> z(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const double xi = in[i];
      const auto row = w.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) z[j] += xi * row[j];
    }
    finish_layer(net, l, std::move(z), tr);
  }
  return tr;
}

std::vector<double> forward_digital(const AnalogNetwork& net, std::span<const double> x) {
  return trace_digital(net, x).output;
}

NetworkReadout make_readout(const AnalogNetwork& net, double t) {
  require_tiles(net);
  NetworkReadout ro;
  ro.t = t;
  ro.layers.resize(net.tiles().size());
  for (std::size_t l = 0; l < net.tiles().size(); ++l) {
    for (const auto& tile : net.tiles()[l].tiles) ro.layers[l].push_back(make_readout(tile, t));
  }
  return ro;
}

ForwardTrace trace_analog(const AnalogNetwork& net, const NetworkReadout& readout,
                          std::span<const double> x, Rng& rng) {
  require_tiles(net);
  check_input(net, x);
  if (readout.layers.size() != net.tiles().size()) {
    throw std::logic_error("forward_analog: readout does not match network tiles");
  }
  ForwardTrace tr;
  tr.inputs.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const AnalogLayer& layer = net.tiles()[l];
    const std::vector<double>& in = tr.inputs[l];
    std::vector<double> z(net.spec().layer_sizes[l + 1], 0.0);
    for (std::size_t k = 0; k < layer.tiles.size(); ++k) {
      const TileReadout& tro = readout.layers[l][k];
      const std::span<const double> part(in.data() + layer.row_offsets[k], tro.rows);
      const std::vector<double> y = mvm(tro, part, rng);
      for (std::size_t j = 0; j < z.size(); ++j) z[j] += y[j];
    }
    finish_layer(net, l, std::move(z), tr);
  }
  return tr;
}

std::vector<double> forward_analog(const AnalogNetwork& net, const NetworkReadout& readout,
                                   std::span<const double> x, Rng& rng) {
  return trace_analog(net, readout, x, rng).output;
}

std::vector<double> forward_analog(const AnalogNetwork& net, std::span<const double> x,
                                   double t, Rng& rng) {
  require_tiles(net);
  return forward_analog(net, make_readout(net, t), x, rng);
}

namespace {

Matrix row_block(const Matrix& w, std::size_t offset, std::size_t rows) {
  Matrix out(rows, w.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(w.row(offset + r).begin(), w.row(offset + r).end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

void reprogram(AnalogNetwork& net, Rng& rng) {
  for (const auto& layer : net.layers()) {
    for (double w : layer.weights.data()) {
      if (!std::isfinite(w)) throw std::invalid_argument("reprogram: non-finite master weight");
    }
  }
  const AnalogConfig& cfg = net.analog();
  net.programming_seed = rng();
  Rng prog(net.programming_seed);
  const bool fresh = !net.programmed();
  if (fresh) net.tiles().resize(net.layers().size());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const Matrix& w = net.layers()[l].weights;
    AnalogLayer& al = net.tiles()[l];
    std::size_t k = 0;
    for (std::size_t off = 0; off < w.rows(); off += cfg.max_tile_rows, ++k) {
      const std::size_t rows = std::min(cfg.max_tile_rows, w.rows() - off);
      const Matrix block = off == 0 && rows == w.rows() ? w : row_block(w, off, rows);
      if (fresh) {
        al.row_offsets.push_back(off);
        al.tiles.push_back(
            map_weights(block, cfg.device, cfg.converters, cfg.slices, prog, cfg.ir_drop_r));
      } else {
        reprogram_tile(al.tiles[k], block, prog);
      }
    }
  }
}

std::vector<FaultMask> fault_masks(const AnalogNetwork& net) {
  std::vector<FaultMask> out;
  for (const auto& layer : net.tiles()) {
    for (const auto& tile : layer.tiles) out.push_back(tile.fault_mask);
  }
  return out;
}

void apply_fault_masks(AnalogNetwork& net, const std::vector<FaultMask>& masks) {
  require_tiles(net);
  std::size_t k = 0;
  for (const auto& layer : net.tiles()) k += layer.tiles.size();
  if (masks.size() != k) throw std::invalid_argument("apply_fault_masks: mask count mismatch");
  k = 0;
  for (auto& layer : net.tiles()) {
    for (auto& tile : layer.tiles) {
      if (!(masks[k].shape() == tile.shape)) {
        throw std::invalid_argument("apply_fault_masks: mask shape mismatch");
      }
      tile.fault_mask = masks[k++];
    }
  }
}

std::vector<FaultMask> sample_network_faults(const AnalogNetwork& net, double ratio, Rng& rng) {
  require_tiles(net);
  std::vector<FaultMask> out;
  for (const auto& layer : net.tiles()) {
    for (const auto& tile : layer.tiles) out.push_back(sample_fault_mask(tile.shape, ratio, rng));
  }
  return out;
}

std::vector<Matrix> effective_weights(const AnalogNetwork& net, double t) {
  require_tiles(net);
  std::vector<Matrix> out;
  for (std::size_t l = 0; l < net.tiles().size(); ++l) {
    const AnalogLayer& al = net.tiles()[l];
    Matrix w(net.spec().layer_sizes[l], net.spec().layer_sizes[l + 1]);
    for (std::size_t k = 0; k < al.tiles.size(); ++k) {
      const Matrix part = effective_weights(al.tiles[k], t);
      for (std::size_t r = 0; r < part.rows(); ++r) {
        std::copy(part.row(r).begin(), part.row(r).end(), w.row(al.row_offsets[k] + r).begin());
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace memsim
