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

#include <string>
#include <string_view>

#include "memsim/rng.hpp"

namespace memsim {

enum class Technology { PCM, RRAM };

std::string to_string(Technology tech);
Technology parse_technology(std::string_view name);

/// Conductances are in microsiemens, times in seconds.
struct DeviceModelSpec {
  Technology technology = Technology::PCM;
  double g_min = 0.1;
  double g_max = 25.0;
  // Programming noise sigma(g) = prog_noise_a + prog_noise_b * g.
  double prog_noise_a = 0.2;
  double prog_noise_b = 0.02;
  double read_noise_frac = 0.02;
  double drift_nu_mean = 0.004;
  double drift_nu_std = 0.0007;
  double drift_t0 = 1.0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Same technology, every stochastic term and drift switched off.
  DeviceModelSpec noise_free() const;

  friend bool operator==(const DeviceModelSpec&, const DeviceModelSpec&) = default;
};

DeviceModelSpec pcm_preset();
DeviceModelSpec rram_preset();
/// "pcm" or "rram" (case-insensitive).
DeviceModelSpec device_preset(std::string_view name);

double programming_sigma(double target, const DeviceModelSpec& spec) noexcept;

/// Writes `target` with conductance-dependent Gaussian error; the result is
/// clamped to the device window.
double program_conductance(double target, const DeviceModelSpec& spec, Rng& rng);

/// Power-law drift g0 * (t / t0)^(-nu), floored at g_min. t == 0 means the
/// read happens right after programming and returns g0 unchanged.
double apply_drift(double g0, double t, const DeviceModelSpec& spec, double nu);

/// Per-device drift exponent, drawn once at programming time. Negative draws
/// are clipped to zero (drift never increases conductance).
double sample_drift_exponent(const DeviceModelSpec& spec, Rng& rng);

/// Drifted conductance with multiplicative Gaussian read noise, floored at 0.
double read_conductance(double g_stored, double t, const DeviceModelSpec& spec, double nu,
                        Rng& rng);

}  // namespace memsim
