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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "memsim/dataset.hpp"
#include "memsim/network.hpp"
#include "memsim/rng.hpp"

namespace memsim {

enum class Optimizer { Adam, SGD };
std::string to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

/// When tiles are rebuilt from the masters during hardware-aware training.
enum class ReprogramCadence { Batch, Epoch };
std::string to_string(ReprogramCadence c);
ReprogramCadence parse_cadence(std::string_view name);

/// Per-epoch learning-rate schedule. Cosine decays from learning_rate at
/// epoch 0 towards zero at the end of the run.
enum class LrSchedule { Constant, Cosine };
std::string to_string(LrSchedule s);
LrSchedule parse_lr_schedule(std::string_view name);

/// Serial runs the same chunked arithmetic on one thread, so both modes
/// produce bit-identical results.
enum class Execution { Serial, Parallel };

struct TrainConfig {
  std::size_t epochs = 150;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool hwa = true;
  ReprogramCadence cadence = ReprogramCadence::Batch;
  LrSchedule lr_schedule = LrSchedule::Cosine;
  /// Global L2 bound on each batch gradient, 0 disables. Cosine-loss
  /// gradients scale with 1/|pred|, so a single near-zero prediction can
  /// otherwise dominate an update.
  double max_grad_norm = 1.0;
  Execution execution = Execution::Parallel;

  void validate() const;
};

/// Learning rate used throughout `epoch` (0-based).
double scheduled_lr(const TrainConfig& cfg, std::size_t epoch);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_time_s = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  std::size_t size() const noexcept { return epochs.size(); }
  bool empty() const noexcept { return epochs.empty(); }
  /// Columns: epoch,train_loss,val_loss,wall_time_s
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

inline constexpr double kCosineEps = 1e-8;

/// 1 - cos(pred, target) with |pred| guarded by kCosineEps. Range [0, 2].
double cosine_loss(std::span<const double> pred, std::span<const double> target);
/// d cosine_loss / d pred; the guard is treated as a constant.
void cosine_loss_grad(std::span<const double> pred, std::span<const double> target,
                      std::span<double> grad);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;

  static Gradients zeros_like(const AnalogNetwork& net);
  void add(const Gradients& other);
  double norm() const;
  /// Rescales to L2 norm `max_norm` when larger.
  void clip_norm(double max_norm);
};

/// Traces of a batch of forward passes. Sample k of the batch is row
/// rows[k] of `inputs` and draws its noise from derive_seed(noise_seed, k).
/// With readout == nullptr the digital path is used.
std::vector<ForwardTrace> forward_batch(const AnalogNetwork& net, const NetworkReadout* readout,
                                        const Matrix& inputs, std::span<const std::size_t> rows,
                                        std::uint64_t noise_seed, Execution exec);

/// Outputs only (no trace), one row per input row.
Matrix predict_batch(const AnalogNetwork& net, const NetworkReadout* readout,
                     const Matrix& inputs, std::uint64_t noise_seed, Execution exec);

/// Gradients of the mean cosine loss over the batch. Propagates through the
/// master weights; the traces supply the activations observed in the
/// forward pass and targets.row(k) belongs to traces[k].
Gradients backward_batch(const AnalogNetwork& net, std::span<const ForwardTrace> traces,
                         const Matrix& targets, Execution exec);

/// Ideal (noise-free, master-weight) backward pass. Throws std::logic_error
/// when the cache is missing or does not match the network.
Gradients backward_ideal(const AnalogNetwork& net, std::span<const ForwardTrace> traces,
                         const Matrix& targets);

/// Hardware-aware training. The forward pass runs on the tiles when
/// cfg.hwa is set, the backward pass is ideal and updates the masters.
/// Tiles are rebuilt from the masters at the configured cadence and once
/// more after every epoch, before validation at t = 0.
TrainHistory train_hwa(AnalogNetwork& net, const Dataset& train, const Dataset& val,
                       const TrainConfig& cfg, Rng& rng);

/// Continues training with the given fault masks held fixed.
TrainHistory retrain_after_faults(AnalogNetwork& net, const std::vector<FaultMask>& masks,
                                  const Dataset& train, const Dataset& val,
                                  const TrainConfig& cfg, Rng& rng);

struct Evaluation {
  double mean = 0.0;
  double std = 0.0;             // across repeats
  std::vector<double> repeats;  // mean loss of each pass
  double standard_error() const;
};

/// Mean cosine loss of the analog forward at drift time t, averaged over
/// `repeats` stochastic passes on the same programmed tiles.
Evaluation evaluate(const AnalogNetwork& net, const Dataset& data, double t, std::size_t repeats,
                    Rng& rng, Execution exec = Execution::Parallel);

double evaluate_digital(const AnalogNetwork& net, const Dataset& data);

}  // namespace memsim
