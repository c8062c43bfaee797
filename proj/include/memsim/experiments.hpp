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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memsim/checkpoint.hpp"
#include "memsim/config.hpp"
#include "memsim/dataset.hpp"
#include "memsim/network.hpp"
#include "memsim/training.hpp"

namespace memsim {

enum class ExperimentKind { Baseline, SliceSweep, FaultSweep, DriftEval, TransferProfile };

std::string to_string(ExperimentKind k);
/// Accepts both config names ("slice_sweep") and CLI names ("sweep-slices").
ExperimentKind parse_experiment(std::string_view name);

struct DatasetConfig {
  std::size_t n_samples = 50000;
  double val_fraction = 0.1;
};

struct TransferConfig {
  double t_go = 1.0;       // receding-horizon time-to-go of the closed loop
  std::size_t steps = 200;  // dt = t_go / steps
  double alpha = 0.3;       // low-pass coefficient for the analog stream
  std::size_t slices = 8;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Baseline;
  std::vector<Technology> technologies{Technology::PCM, Technology::RRAM};
  std::vector<std::size_t> slices_list{1, 2, 4, 8, 16};
  std::vector<double> fault_ratios;
  bool retrain = true;
  std::optional<std::size_t> retrain_epochs;
  std::vector<double> drift_times_s{0.0, 1.0, 86400.0, 172800.0};
  std::size_t analog_slices = 8;
  std::size_t eval_repeats = 8;
  NetworkSpec network;
  TrainConfig train;
  OracleParams oracle;
  DatasetConfig dataset;
  ConverterSpec converters;
  double ir_drop_r = 0.0;
  DeviceModelSpec pcm = pcm_preset();
  DeviceModelSpec rram = rram_preset();
  TransferConfig transfer;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";

  ExperimentConfig();

  /// 40 epochs, 10,000 samples.
  static ExperimentConfig desk();
  /// 150 epochs, 50,000 samples.
  static ExperimentConfig full();

  void validate() const;
  const DeviceModelSpec& device(Technology t) const {
    return t == Technology::PCM ? pcm : rram;
  }
  AnalogConfig analog_config(Technology t, std::size_t slices) const;
};

std::vector<double> default_fault_ratios();

/// Starts from the preset named by "preset" (desk when absent) and applies
/// every other key as an override.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRecord {
  std::string experiment;
  std::string technology;
  std::size_t slices = 0;
  double fault_ratio = 0.0;
  bool retrained = false;
  double t_seconds = 0.0;
  double loss = 0.0;
  double loss_std = 0.0;
  std::uint64_t seed = 0;
  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

inline constexpr const char* kResultsHeader =
    "experiment,technology,slices,fault_ratio,retrained,t_seconds,loss,loss_std,seed";

std::string results_csv(std::span<const ResultRecord> records);
json results_json(std::span<const ResultRecord> records);
std::vector<ResultRecord> parse_results_csv(const std::string& text);
std::vector<ResultRecord> records_from_json(const json& j);
/// Writes results.csv and results.json into out_dir, overwriting.
void emit_results(std::span<const ResultRecord> records, const std::filesystem::path& out_dir);

/// Shared state of one configured run: datasets and cached checkpoints.
class ExperimentContext {
 public:
  explicit ExperimentContext(ExperimentConfig cfg);

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const Dataset& train_set() const noexcept { return train_; }
  const Dataset& val_set() const noexcept { return val_; }

  /// Digital baseline; loaded from out_dir when a matching checkpoint
  /// exists, otherwise trained (and saved).
  AnalogNetwork digital_network(TrainHistory* history = nullptr);
  /// HWA-trained analog network for (technology, slices), cached likewise.
  AnalogNetwork analog_network(Technology tech, std::size_t slices,
                               TrainHistory* history = nullptr);

  std::filesystem::path digital_checkpoint_path() const;
  std::filesystem::path analog_checkpoint_path(Technology tech, std::size_t slices) const;

 private:
  std::string fingerprint(const std::string& role, const AnalogConfig* analog) const;

  ExperimentConfig cfg_;
  Dataset train_;
  Dataset val_;
};

/// Writes dataset.csv, train.csv and val.csv into out_dir.
void run_gen_data(ExperimentContext& ctx);

std::vector<ResultRecord> run_baseline(ExperimentContext& ctx);
std::vector<ResultRecord> run_slice_sweep(ExperimentContext& ctx);
std::vector<ResultRecord> run_fault_sweep(ExperimentContext& ctx);
std::vector<ResultRecord> run_drift_eval(ExperimentContext& ctx);

struct TransferStep {
  std::size_t step = 0;
  double time = 0.0;
  std::array<double, 5> state{};
  double oracle_angle = 0.0;
  double digital_angle = 0.0;
  double analog_angle = 0.0;
  double analog_filtered_angle = 0.0;
};

struct TransferProfile {
  std::vector<TransferStep> steps;
  bool truncated = false;
  double digital_error_std = 0.0;
  double analog_error_std = 0.0;
  double filtered_error_std = 0.0;
  double digital_error_mean_abs = 0.0;
  double analog_error_mean_abs = 0.0;

  std::string to_csv() const;
};

/// Closed-loop double-integrator run under oracle control (RK4), recording
/// oracle, digital-net and analog-net thrust angles at every step.
TransferProfile run_transfer_profile(ExperimentContext& ctx);
TransferProfile transfer_profile(const AnalogNetwork& digital, const AnalogNetwork& analog,
                                 const ExperimentConfig& cfg, std::uint64_t seed);

/// Exponential moving average y_k = alpha x_k + (1 - alpha) y_{k-1}, y_0 = x_0.
std::vector<double> lowpass_filter(std::span<const double> series, double alpha);
/// Same filter on 2-D direction vectors, renormalized to unit length.
std::vector<std::array<double, 2>> lowpass_filter(std::span<const std::array<double, 2>> series,
                                                  double alpha);

/// Wraps an angle difference into (-pi, pi].
double wrap_angle(double a);

/// Runs cfg.experiment, writes all outputs under cfg.out_dir and returns the
/// records (empty for the transfer profile).
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg);

}  // namespace memsim
