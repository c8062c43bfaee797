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

#include "memsim/config.hpp"

#include <algorithm>
#include <string>

namespace memsim {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* context) {
  if (!j.is_object()) throw ConfigError(std::string(context) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
    }
  }
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      field = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

void to_json(json& j, const DeviceModelSpec& s) {
  j = json{{"technology", to_string(s.technology)},
           {"g_min", s.g_min},
           {"g_max", s.g_max},
           {"prog_noise_a", s.prog_noise_a},
           {"prog_noise_b", s.prog_noise_b},
           {"read_noise_frac", s.read_noise_frac},
           {"drift_nu_mean", s.drift_nu_mean},
           {"drift_nu_std", s.drift_nu_std},
           {"drift_t0", s.drift_t0}};
}

void from_json(const json& j, DeviceModelSpec& s) {
  reject_unknown_keys(j,
                      {"technology", "g_min", "g_max", "prog_noise_a", "prog_noise_b",
                       "read_noise_frac", "drift_nu_mean", "drift_nu_std", "drift_t0"},
                      "device");
  if (j.contains("technology")) s.technology = parse_technology(j.at("technology").get<std::string>());
  read(j, "g_min", s.g_min);
  read(j, "g_max", s.g_max);
  read(j, "prog_noise_a", s.prog_noise_a);
  read(j, "prog_noise_b", s.prog_noise_b);
  read(j, "read_noise_frac", s.read_noise_frac);
  read(j, "drift_nu_mean", s.drift_nu_mean);
  read(j, "drift_nu_std", s.drift_nu_std);
  read(j, "drift_t0", s.drift_t0);
}

void to_json(json& j, const ConverterSpec& s) {
  j = json{{"dac_bits", s.dac_bits},
           {"adc_bits", s.adc_bits},
           {"input_clip", s.input_clip},
           {"output_clip", s.output_clip},
           {"output_noise_std", s.output_noise_std},
           {"max_bound_iterations", s.max_bound_iterations}};
}

void from_json(const json& j, ConverterSpec& s) {
  reject_unknown_keys(j,
                      {"dac_bits", "adc_bits", "input_clip", "output_clip", "output_noise_std",
                       "max_bound_iterations"},
                      "converters");
  read(j, "dac_bits", s.dac_bits);
  read(j, "adc_bits", s.adc_bits);
  read(j, "input_clip", s.input_clip);
  read(j, "output_clip", s.output_clip);
  read(j, "output_noise_std", s.output_noise_std);
  read(j, "max_bound_iterations", s.max_bound_iterations);
}

void to_json(json& j, const NetworkSpec& s) {
  j = json{{"layer_sizes", s.layer_sizes},
           {"hidden_activation", to_string(s.hidden_activation)},
           {"output_activation", to_string(s.output_activation)},
           {"bias", s.bias},
           {"output_init_gain", s.output_init_gain}};
}

void from_json(const json& j, NetworkSpec& s) {
  reject_unknown_keys(j, {"layer_sizes", "hidden_activation", "output_activation", "bias",
                          "output_init_gain"},
                      "network");
  read(j, "layer_sizes", s.layer_sizes);
  if (j.contains("hidden_activation")) {
    s.hidden_activation = parse_activation(j.at("hidden_activation").get<std::string>());
  }
  if (j.contains("output_activation")) {
    s.output_activation = parse_activation(j.at("output_activation").get<std::string>());
  }
  read(j, "bias", s.bias);
  read(j, "output_init_gain", s.output_init_gain);
}

void to_json(json& j, const AnalogConfig& s) {
  j = json{{"device_preset", s.device_preset}, {"device", s.device},
           {"converters", s.converters},       {"slices", s.slices},
           {"ir_drop_r", s.ir_drop_r},         {"max_tile_rows", s.max_tile_rows}};
}

void from_json(const json& j, AnalogConfig& s) {
  reject_unknown_keys(
      j, {"device_preset", "device", "converters", "slices", "ir_drop_r", "max_tile_rows"},
      "analog");
  if (j.contains("device_preset")) {
    s.device_preset = j.at("device_preset").get<std::string>();
    s.device = device_preset(s.device_preset);
  }
  if (j.contains("device")) from_json(j.at("device"), s.device);
  if (j.contains("converters")) from_json(j.at("converters"), s.converters);
  read(j, "slices", s.slices);
  read(j, "ir_drop_r", s.ir_drop_r);
  read(j, "max_tile_rows", s.max_tile_rows);
}

void to_json(json& j, const TrainConfig& s) {
  j = json{{"epochs", s.epochs},
           {"batch_size", s.batch_size},
           {"learning_rate", s.learning_rate},
           {"optimizer", to_string(s.optimizer)},
           {"beta1", s.beta1},
           {"beta2", s.beta2},
           {"adam_eps", s.adam_eps},
           {"seed", s.seed},
           {"hwa", s.hwa},
           {"reprogram", to_string(s.cadence)},
           {"lr_schedule", to_string(s.lr_schedule)},
           {"max_grad_norm", s.max_grad_norm}};
}

void from_json(const json& j, TrainConfig& s) {
  reject_unknown_keys(j,
                      {"epochs", "batch_size", "learning_rate", "optimizer", "beta1", "beta2",
                       "adam_eps", "seed", "hwa", "reprogram", "lr_schedule",
                       "max_grad_norm"},
                      "train");
  read(j, "epochs", s.epochs);
  read(j, "batch_size", s.batch_size);
  read(j, "learning_rate", s.learning_rate);
  if (j.contains("optimizer")) s.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  read(j, "beta1", s.beta1);
  read(j, "beta2", s.beta2);
  read(j, "adam_eps", s.adam_eps);
  read(j, "seed", s.seed);
  read(j, "hwa", s.hwa);
  if (j.contains("reprogram")) s.cadence = parse_cadence(j.at("reprogram").get<std::string>());
  if (j.contains("lr_schedule")) {
    s.lr_schedule = parse_lr_schedule(j.at("lr_schedule").get<std::string>());
  }
  read(j, "max_grad_norm", s.max_grad_norm);
}

void to_json(json& j, const OracleParams& s) {
  j = json{{"t_go_min", s.t_go_min},
           {"t_go_max", s.t_go_max},
           {"position_range", s.position_range},
           {"velocity_range", s.velocity_range},
           {"min_accel", s.min_accel}};
}

void from_json(const json& j, OracleParams& s) {
  reject_unknown_keys(j, {"t_go_min", "t_go_max", "position_range", "velocity_range", "min_accel"},
                      "oracle");
  read(j, "t_go_min", s.t_go_min);
  read(j, "t_go_max", s.t_go_max);
  read(j, "position_range", s.position_range);
  read(j, "velocity_range", s.velocity_range);
  read(j, "min_accel", s.min_accel);
}

}  // namespace memsim
