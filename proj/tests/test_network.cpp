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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "memsim/network.hpp"

namespace memsim {
namespace {

AnalogConfig ideal_analog(std::size_t slices = 1) {
  AnalogConfig a;
  a.device = pcm_preset().noise_free();
  a.converters = ConverterSpec::ideal();
  a.slices = slices;
  return a;
}

std::vector<double> random_input(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

TEST(Activation, Values) {
  EXPECT_NEAR(activation(Activation::Tanh, 0.5), 0.462117, 1e-6);
  EXPECT_NEAR(activation(Activation::Softplus, 0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(activation(Activation::Softplus, 1.0), 1.3132617, 1e-7);
  EXPECT_DOUBLE_EQ(activation(Activation::Softplus, 50.0), 50.0);
  EXPECT_GT(activation(Activation::Softplus, -50.0), 0.0);
  EXPECT_NEAR(activation_grad(Activation::Softplus, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(activation_grad(Activation::Tanh, 0.0), 1.0, 1e-15);
}

TEST(Activation, GradMatchesFiniteDifference) {
  for (auto a : {Activation::Softplus, Activation::Tanh}) {
    for (double x : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
      const double h = 1e-6;
      const double fd = (activation(a, x + h) - activation(a, x - h)) / (2 * h);
      EXPECT_NEAR(activation_grad(a, x), fd, 1e-8);
    }
  }
}

TEST(NetworkSpec, ParameterCount) {
  NetworkSpec s;
  EXPECT_EQ(s.parameter_count(), 34050u);
  EXPECT_EQ(s.layer_count(), 4u);
  EXPECT_EQ(s.activation_of(0), Activation::Softplus);
  EXPECT_EQ(s.activation_of(3), Activation::Tanh);
  s.layer_sizes = {5};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(MakeNetwork, GlorotBounds) {
  Rng rng(1);
  const AnalogNetwork net = make_network(NetworkSpec{}, AnalogConfig{}, rng);
  ASSERT_EQ(net.layers().size(), 4u);
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& l = net.layers()[i];
    double bound = std::sqrt(6.0 / static_cast<double>(l.weights.rows() + l.weights.cols()));
    if (i + 1 == net.layers().size()) bound *= NetworkSpec{}.output_init_gain;
    double max_abs = 0.0;
    for (double w : l.weights.data()) max_abs = std::max(max_abs, std::abs(w));
    EXPECT_LE(max_abs, bound);
    EXPECT_GT(max_abs, 0.9 * bound);
    for (double b : l.bias) EXPECT_EQ(b, 0.0);
  }
  EXPECT_FALSE(net.programmed());
}

TEST(Forward, DigitalOutputInTanhRange) {
  Rng rng(2);
  const AnalogNetwork net = make_network(NetworkSpec{}, AnalogConfig{}, rng);
  for (int i = 0; i < 20; ++i) {
    const auto y = forward_digital(net, random_input(5, rng));
    ASSERT_EQ(y.size(), 2u);
    for (double v : y) {
      EXPECT_GT(v, -1.0);
      EXPECT_LT(v, 1.0);
    }
  }
  EXPECT_THROW(forward_digital(net, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST(Forward, AnalogRequiresProgramming) {
  Rng rng(3);
  const AnalogNetwork net = make_network(NetworkSpec{}, AnalogConfig{}, rng);
  EXPECT_THROW(forward_analog(net, random_input(5, rng), 0.0, rng), std::logic_error);
}

TEST(Forward, IdealAnalogMatchesDigital) {
  Rng rng(4);
  AnalogNetwork net = make_network(NetworkSpec{}, ideal_analog(), rng);
  reprogram(net, rng);
  const NetworkReadout ro = make_readout(net, 0.0);
  for (int i = 0; i < 50; ++i) {
    const auto x = random_input(5, rng);
    const auto yd = forward_digital(net, x);
    const auto ya = forward_analog(net, ro, x, rng);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(ya[j], yd[j], 1e-3);
  }
}

TEST(Forward, TraceMatchesForward) {
  Rng rng(5);
  const AnalogNetwork net = make_network(NetworkSpec{}, AnalogConfig{}, rng);
  const auto x = random_input(5, rng);
  const ForwardTrace t = trace_digital(net, x);
  EXPECT_EQ(t.output, forward_digital(net, x));
  ASSERT_EQ(t.inputs.size(), 4u);
  ASSERT_EQ(t.preacts.size(), 4u);
  for (std::size_t l = 0; l + 1 < 4; ++l) {
    for (std::size_t j = 0; j < t.preacts[l].size(); ++j) {
      EXPECT_DOUBLE_EQ(t.inputs[l + 1][j], activation(Activation::Softplus, t.preacts[l][j]));
    }
  }
}

TEST(Forward, AnalogMeanTracksEffectiveWeights) {
  // Averaged noisy forward passes approach the digital forward through the
  // device readback weights.
  Rng rng(6);
  AnalogConfig a;
  a.converters = ConverterSpec::ideal();
  a.converters.output_noise_std = 0.01;
  a.slices = 4;
  AnalogNetwork net = make_network(NetworkSpec{}, a, rng);
  reprogram(net, rng);
  AnalogNetwork readback = net;
  const auto eff = effective_weights(net, 0.0);
  for (std::size_t l = 0; l < eff.size(); ++l) readback.layers()[l].weights = eff[l];
  const NetworkReadout ro = make_readout(net, 0.0);
  const auto x = random_input(5, rng);
  const auto expect = forward_digital(readback, x);
  std::vector<double> mean(2, 0.0);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto y = forward_analog(net, ro, x, rng);
    for (std::size_t j = 0; j < 2; ++j) mean[j] += y[j] / n;
  }
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(mean[j], expect[j], 5e-3);
}

TEST(Tiling, TallLayersSplitAcrossTiles) {
  NetworkSpec s;
  s.layer_sizes = {5, 300, 2};
  AnalogConfig a = ideal_analog();
  a.max_tile_rows = 128;
  Rng rng(7);
  AnalogNetwork net = make_network(s, a, rng);
  reprogram(net, rng);
  EXPECT_EQ(net.tiles()[0].tiles.size(), 1u);
  EXPECT_EQ(net.tiles()[1].tiles.size(), 3u);
  EXPECT_EQ(net.tiles()[1].row_offsets, (std::vector<std::size_t>{0, 128, 256}));
  const NetworkReadout ro = make_readout(net, 0.0);
  for (int i = 0; i < 10; ++i) {
    const auto x = random_input(5, rng);
    const auto yd = forward_digital(net, x);
    const auto ya = forward_analog(net, ro, x, rng);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(ya[j], yd[j], 1e-3);
  }
}

TEST(Reprogram, PreservesFaultMasks) {
  Rng rng(8);
  AnalogNetwork net = make_network(NetworkSpec{}, AnalogConfig{}, rng);
  reprogram(net, rng);
  const auto masks = sample_network_faults(net, 0.05, rng);
  apply_fault_masks(net, masks);
  for (auto& l : net.layers())
    for (double& w : l.weights.data()) w *= 0.5;
  reprogram(net, rng);
  EXPECT_EQ(fault_masks(net), masks);
}

TEST(Faults, FullMaskLeavesOnlyBiases) {
  Rng rng(9);
  AnalogNetwork net = make_network(NetworkSpec{}, ideal_analog(), rng);
  for (auto& l : net.layers())
    for (double& b : l.bias) b = 0.3;
  reprogram(net, rng);
  apply_fault_masks(net, sample_network_faults(net, 1.0, rng));
  const NetworkReadout ro = make_readout(net, 0.0);
  const auto y1 = forward_analog(net, ro, random_input(5, rng), rng);
  const auto y2 = forward_analog(net, ro, random_input(5, rng), rng);
  EXPECT_EQ(y1, y2);
  EXPECT_NEAR(y1[0], std::tanh(0.3), 1e-3);
}

TEST(Faults, MaskShapeMismatchThrows) {
  Rng rng(10);
  AnalogNetwork net = make_network(NetworkSpec{}, AnalogConfig{}, rng);
  reprogram(net, rng);
  auto masks = sample_network_faults(net, 0.1, rng);
  masks.pop_back();
  EXPECT_THROW(apply_fault_masks(net, masks), std::invalid_argument);
}

}  // namespace
}  // namespace memsim
