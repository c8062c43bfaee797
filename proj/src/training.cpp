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

#include "memsim/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "memsim/format.hpp"

namespace memsim {

std::string to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(std::string_view name) {
  if (name == "adam") return Optimizer::Adam;
  if (name == "sgd") return Optimizer::SGD;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

std::string to_string(ReprogramCadence c) { return c == ReprogramCadence::Batch ? "batch" : "epoch"; }

ReprogramCadence parse_cadence(std::string_view name) {
  if (name == "batch") return ReprogramCadence::Batch;
  if (name == "epoch") return ReprogramCadence::Epoch;
  throw std::invalid_argument("unknown reprogram cadence '" + std::string(name) + "'");
}

std::string to_string(LrSchedule s) { return s == LrSchedule::Cosine ? "cosine" : "constant"; }

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "cosine") return LrSchedule::Cosine;
  if (name == "constant") return LrSchedule::Constant;
  throw std::invalid_argument("unknown lr schedule '" + std::string(name) + "'");
}

double scheduled_lr(const TrainConfig& cfg, std::size_t epoch) {
  if (cfg.lr_schedule == LrSchedule::Constant || cfg.epochs == 0) return cfg.learning_rate;
  const double frac = static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
  return cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train: Adam betas must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw std::invalid_argument("train: adam_eps must be > 0");
  if (!(max_grad_norm >= 0.0)) throw std::invalid_argument("train: max_grad_norm must be >= 0");
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,wall_time_s\n";
  for (const auto& r : epochs) {
    out << r.epoch << ',' << format_double17(r.train_loss) << ',' << format_double17(r.val_loss)
        << ',' << format_double(r.wall_time_s) << '\n';
  }
  return out.str();
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << to_csv();
}

double cosine_loss(std::span<const double> pred, std::span<const double> target) {
  double dot = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    dot += pred[i] * target[i];
    pp += pred[i] * pred[i];
    tt += target[i] * target[i];
  }
  const double np = std::max(std::sqrt(pp), kCosineEps);
  const double loss = 1.0 - dot / (np * std::sqrt(tt));
  return std::clamp(loss, 0.0, 2.0);
}

void cosine_loss_grad(std::span<const double> pred, std::span<const double> target,
                      std::span<double> grad) {
  double dot = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    dot += pred[i] * target[i];
    pp += pred[i] * pred[i];
    tt += target[i] * target[i];
  }
  const double np = std::sqrt(pp);
  const double nt = std::sqrt(tt);
  if (np <= kCosineEps) {
    for (std::size_t i = 0; i < pred.size(); ++i) grad[i] = -target[i] / (kCosineEps * nt);
    return;
  }
  const double inv = 1.0 / (np * nt);
  const double proj = dot / (pp * np * nt);
  for (std::size_t i = 0; i < pred.size(); ++i) grad[i] = -(target[i] * inv - pred[i] * proj);
}

namespace {

class OptimizerState {
 public:
  OptimizerState(const AnalogNetwork& net, const TrainConfig& cfg)
      : cfg_(cfg), m_(Gradients::zeros_like(net)), v_(Gradients::zeros_like(net)) {}

  void set_lr(double lr) { lr_ = lr; }

  void step(AnalogNetwork& net, const Gradients& g) {
    ++t_;
    const double lr = lr_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto update = [&](std::span<double> p, std::span<const double> d, std::span<double> m,
                      std::span<double> v) {
      if (cfg_.optimizer == Optimizer::SGD) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * d[i];
        return;
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * d[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * d[i] * d[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.adam_eps);
      }
    };
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      DenseLayer& layer = net.layers()[l];
      update(layer.weights.data(), g.weights[l].data(), m_.weights[l].data(),
             v_.weights[l].data());
      if (net.spec().bias) update(layer.bias, g.bias[l], m_.bias[l], v_.bias[l]);
    }
  }

 private:
  const TrainConfig& cfg_;
  Gradients m_;
  Gradients v_;
  std::size_t t_ = 0;
  double lr_ = cfg_.learning_rate;
};

double mean_loss(const Matrix& pred, const Matrix& targets) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.rows(); ++i) acc += cosine_loss(pred.row(i), targets.row(i));
  return acc / static_cast<double>(pred.rows());
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::copy(m.row(rows[k]).begin(), m.row(rows[k]).end(), out.row(k).begin());
  }
  return out;
}

enum SeedTag : std::uint64_t { kShuffle = 1, kProgram = 2, kNoise = 3, kValidate = 4 };

}  // namespace

TrainHistory train_hwa(AnalogNetwork& net, const Dataset& train, const Dataset& val,
                       const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (train.empty() || val.empty()) throw std::invalid_argument("train_hwa: empty dataset");
  const std::uint64_t base = derive_seed(cfg.seed, rng());
  const Matrix x_train = input_matrix(train);
  const Matrix y_train = target_matrix(train);
  const Matrix x_val = input_matrix(val);
  const Matrix y_val = target_matrix(val);

  TrainHistory history;
  if (cfg.epochs == 0) return history;

  auto program = [&](std::uint64_t seed) {
    Rng prog(seed);
    reprogram(net, prog);
  };
  NetworkReadout readout;
  if (cfg.hwa) {
    program(derive_seed(base, kProgram));
    readout = make_readout(net, 0.0);
  }

  OptimizerState opt(net, cfg);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto t_start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::uint64_t eseed = derive_seed(base, 100 + epoch);
    Rng shuffle_rng(derive_seed(eseed, kShuffle));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    opt.set_lr(scheduled_lr(cfg, epoch));

    double loss_sum = 0.0;
    std::size_t batch = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::span<const std::size_t> rows(order.data() + start,
                                              std::min(cfg.batch_size, order.size() - start));
      const std::uint64_t bseed = derive_seed(eseed, 1000 + batch);
      if (cfg.hwa && cfg.cadence == ReprogramCadence::Batch && (epoch > 0 || batch > 0)) {
        program(derive_seed(bseed, kProgram));
        readout = make_readout(net, 0.0);
      }
      const auto traces = forward_batch(net, cfg.hwa ? &readout : nullptr, x_train, rows,
                                        derive_seed(bseed, kNoise), cfg.execution);
      const Matrix targets = gather_rows(y_train, rows);
      for (std::size_t k = 0; k < traces.size(); ++k) {
        loss_sum += cosine_loss(traces[k].output, targets.row(k));
      }
      Gradients grad = backward_batch(net, traces, targets, cfg.execution);
      if (cfg.max_grad_norm > 0.0) grad.clip_norm(cfg.max_grad_norm);
      opt.step(net, grad);
    }

    double val_loss = 0.0;
    if (cfg.hwa) {
      program(derive_seed(eseed, kProgram));
      readout = make_readout(net, 0.0);
      val_loss = mean_loss(predict_batch(net, &readout, x_val, derive_seed(eseed, kValidate),
                                         cfg.execution),
                           y_val);
    } else {
      val_loss = mean_loss(predict_batch(net, nullptr, x_val, 0, cfg.execution), y_val);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    history.epochs.push_back(
        {epoch, loss_sum / static_cast<double>(train.size()), val_loss, wall});
  }
  return history;
}

TrainHistory retrain_after_faults(AnalogNetwork& net, const std::vector<FaultMask>& masks,
                                  const Dataset& train, const Dataset& val,
                                  const TrainConfig& cfg, Rng& rng) {
  if (!net.programmed()) {
    Rng prog(derive_seed(cfg.seed, rng()));
    reprogram(net, prog);
  }
  apply_fault_masks(net, masks);
  TrainConfig c = cfg;
  c.hwa = true;
  return train_hwa(net, train, val, c, rng);
}

double Evaluation::standard_error() const {
  if (repeats.size() < 2) return 0.0;
  return std / std::sqrt(static_cast<double>(repeats.size()));
}

Evaluation evaluate(const AnalogNetwork& net, const Dataset& data, double t, std::size_t repeats,
                    Rng& rng, Execution exec) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  if (repeats < 1) throw std::invalid_argument("evaluate: repeats must be >= 1");
  const NetworkReadout readout = make_readout(net, t);
  const Matrix x = input_matrix(data);
  const Matrix y = target_matrix(data);
  const std::uint64_t base = rng();
  Evaluation ev;
  for (std::size_t r = 0; r < repeats; ++r) {
    ev.repeats.push_back(mean_loss(predict_batch(net, &readout, x, derive_seed(base, r), exec), y));
  }
  ev.mean = std::accumulate(ev.repeats.begin(), ev.repeats.end(), 0.0) /
            static_cast<double>(repeats);
  if (repeats > 1) {
    double ss = 0.0;
    for (double v : ev.repeats) ss += (v - ev.mean) * (v - ev.mean);
    ev.std = std::sqrt(ss / static_cast<double>(repeats - 1));
  }
  return ev;
}

double evaluate_digital(const AnalogNetwork& net, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  return mean_loss(predict_batch(net, nullptr, input_matrix(data), 0, Execution::Parallel),
                   target_matrix(data));
}

}  // namespace memsim
