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

// Batch forward/backward kernels. The OpenMP and serial variants run the
// same fixed chunking, so reductions happen in the same order and results
// are identical for any thread count.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "memsim/training.hpp"

namespace memsim {

namespace {

constexpr std::size_t kChunk = 16;

bool parallel(Execution exec) { return exec == Execution::Parallel; }

}  // namespace

std::vector<ForwardTrace> forward_batch(const AnalogNetwork& net, const NetworkReadout* readout,
                                        const Matrix& inputs, std::span<const std::size_t> rows,
                                        std::uint64_t noise_seed, Execution exec) {
  std::vector<ForwardTrace> out(rows.size());
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static) if (parallel(exec))
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto x = inputs.row(rows[static_cast<std::size_t>(k)]);
    if (readout) {
      Rng rng(derive_seed(noise_seed, static_cast<std::uint64_t>(k)));
      out[static_cast<std::size_t>(k)] = trace_analog(net, *readout, x, rng);
    } else {
      out[static_cast<std::size_t>(k)] = trace_digital(net, x);
    }
  }
  return out;
}

Matrix predict_batch(const AnalogNetwork& net, const NetworkReadout* readout,
                     const Matrix& inputs, std::uint64_t noise_seed, Execution exec) {
  Matrix out(inputs.rows(), net.spec().output_size());
  const auto n = static_cast<std::ptrdiff_t>(inputs.rows());
#pragma omp parallel for schedule(static) if (parallel(exec))
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    std::vector<double> y;
    if (readout) {
      Rng rng(derive_seed(noise_seed, static_cast<std::uint64_t>(k)));
      y = forward_analog(net, *readout, inputs.row(i), rng);
    } else {
      y = forward_digital(net, inputs.row(i));
    }
    std::copy(y.begin(), y.end(), out.row(i).begin());
  }
  return out;
}

Gradients Gradients::zeros_like(const AnalogNetwork& net) {
  Gradients g;
  for (const auto& layer : net.layers()) {
    g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    g.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto dst = weights[l].data();
    const auto src = other.weights[l].data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    for (std::size_t j = 0; j < bias[l].size(); ++j) bias[l][j] += other.bias[l][j];
  }
}

double Gradients::norm() const {
  double ss = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (double v : weights[l].data()) ss += v * v;
    for (double v : bias[l]) ss += v * v;
  }
  return std::sqrt(ss);
}

void Gradients::clip_norm(double max_norm) {
  const double n = norm();
  if (!(n > max_norm)) return;
  const double scale = max_norm / n;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (double& v : weights[l].data()) v *= scale;
    for (double& v : bias[l]) v *= scale;
  }
}

namespace {

void check_traces(const AnalogNetwork& net, std::span<const ForwardTrace> traces,
                  const Matrix& targets) {
  const std::size_t L = net.layers().size();
  if (traces.empty()) throw std::logic_error("backward: no cached forward pass");
  if (targets.rows() != traces.size() || targets.cols() != net.spec().output_size()) {
    throw std::logic_error("backward: targets do not match cached batch");
  }
  for (const auto& tr : traces) {
    if (tr.inputs.size() != L || tr.preacts.size() != L ||
        tr.output.size() != net.spec().output_size()) {
      throw std::logic_error("backward: cached activations do not match network");
    }
  }
}

void accumulate_sample(const AnalogNetwork& net, const ForwardTrace& tr,
                       std::span<const double> target, double weight, Gradients& g) {
  const std::size_t L = net.layers().size();
  std::vector<double> delta(tr.output.size());
  cosine_loss_grad(tr.output, target, delta);
  {
    const Activation kind = net.spec().activation_of(L - 1);
    for (std::size_t j = 0; j < delta.size(); ++j) {
      delta[j] *= weight * activation_grad(kind, tr.preacts[L - 1][j]);
    }
  }
  std::vector<double> prev;
  for (std::size_t l = L; l-- > 0;) {
    const Matrix& w = net.layers()[l].weights;
    const std::vector<double>& in = tr.inputs[l];
    Matrix& dw = g.weights[l];
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const double xi = in[i];
      if (xi == 0.0) continue;
      auto row = dw.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) row[j] += xi * delta[j];
    }
    if (net.spec().bias) {
      for (std::size_t j = 0; j < delta.size(); ++j) g.bias[l][j] += delta[j];
    }
    if (l == 0) break;
    prev.assign(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const auto row = w.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j) acc += row[j] * delta[j];
      prev[i] = acc;
    }
    const Activation kind = net.spec().activation_of(l - 1);
    for (std::size_t i = 0; i < prev.size(); ++i) {
      prev[i] *= activation_grad(kind, tr.preacts[l - 1][i]);
    }
    delta.swap(prev);
  }
}

}  // namespace

Gradients backward_batch(const AnalogNetwork& net, std::span<const ForwardTrace> traces,
                         const Matrix& targets, Execution exec) {
  check_traces(net, traces, targets);
  const double weight = 1.0 / static_cast<double>(traces.size());
  const std::size_t n_chunks = (traces.size() + kChunk - 1) / kChunk;
  std::vector<Gradients> partial(n_chunks);
  const auto nc = static_cast<std::ptrdiff_t>(n_chunks);
#pragma omp parallel for schedule(static) if (parallel(exec))
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    Gradients g = Gradients::zeros_like(net);
    const std::size_t end = std::min(traces.size(), (ci + 1) * kChunk);
    for (std::size_t k = ci * kChunk; k < end; ++k) {
      accumulate_sample(net, traces[k], targets.row(k), weight, g);
    }
    partial[ci] = std::move(g);
  }
  Gradients total = std::move(partial[0]);
  for (std::size_t c = 1; c < n_chunks; ++c) total.add(partial[c]);
  return total;
}

Gradients backward_ideal(const AnalogNetwork& net, std::span<const ForwardTrace> traces,
                         const Matrix& targets) {
  return backward_batch(net, traces, targets, Execution::Serial);
}

}  // namespace memsim
