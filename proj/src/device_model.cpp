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

#include "memsim/device_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace memsim {

std::string to_string(Technology tech) {
  switch (tech) {
    case Technology::PCM:
      return "pcm";
    case Technology::RRAM:
      return "rram";
  }
  return "unknown";
}

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

Technology parse_technology(std::string_view name) {
  const std::string n = lowercase(name);
  if (n == "pcm") return Technology::PCM;
  if (n == "rram") return Technology::RRAM;
  throw std::invalid_argument("unknown device technology '" + std::string(name) + "'");
}

void DeviceModelSpec::validate() const {
  require(std::isfinite(g_min) && std::isfinite(g_max), "device: non-finite conductance bounds");
  require(g_min >= 0.0 && g_min < g_max, "device: need 0 <= g_min < g_max");
  require(prog_noise_a >= 0.0 && prog_noise_b >= 0.0, "device: programming noise must be >= 0");
  require(read_noise_frac >= 0.0, "device: read_noise_frac must be >= 0");
  require(drift_nu_mean >= 0.0 && drift_nu_std >= 0.0, "device: drift exponent must be >= 0");
  require(drift_t0 > 0.0, "device: drift_t0 must be > 0");
}

DeviceModelSpec DeviceModelSpec::noise_free() const {
  DeviceModelSpec s = *this;
  s.prog_noise_a = 0.0;
  s.prog_noise_b = 0.0;
  s.read_noise_frac = 0.0;
  s.drift_nu_mean = 0.0;
  s.drift_nu_std = 0.0;
  return s;
}

DeviceModelSpec pcm_preset() {
  DeviceModelSpec s;
  s.technology = Technology::PCM;
  s.read_noise_frac = 0.02;
  // Drift exponents are calibrated to the 24 h / 48 h loss degradation of a
  // trained 8-slice network, not to device data.
  s.drift_nu_mean = 0.004;
  s.drift_nu_std = 0.0007;
  return s;
}

DeviceModelSpec rram_preset() {
  DeviceModelSpec s;
  s.technology = Technology::RRAM;
  s.read_noise_frac = 0.01;
  s.drift_nu_mean = 0.002;
  s.drift_nu_std = 0.0005;
  return s;
}

DeviceModelSpec device_preset(std::string_view name) {
  switch (parse_technology(name)) {
    case Technology::PCM:
      return pcm_preset();
    case Technology::RRAM:
      return rram_preset();
  }
  throw std::invalid_argument("unknown device preset");
}

double programming_sigma(double target, const DeviceModelSpec& spec) noexcept {
  return spec.prog_noise_a + spec.prog_noise_b * target;
}

double program_conductance(double target, const DeviceModelSpec& spec, Rng& rng) {
  if (!(target >= spec.g_min && target <= spec.g_max)) {
    throw std::invalid_argument("program_conductance: target outside [g_min, g_max]");
  }
  const double sigma = programming_sigma(target, spec);
  if (sigma <= 0.0) return target;
  std::normal_distribution<double> noise(0.0, sigma);
  return std::clamp(target + noise(rng), spec.g_min, spec.g_max);
}

double apply_drift(double g0, double t, const DeviceModelSpec& spec, double nu) {
  if (t == 0.0) return g0;
  if (!(t >= spec.drift_t0)) {
    throw std::invalid_argument("apply_drift: t must be 0 or >= drift_t0");
  }
  if (nu == 0.0) return g0;
  return std::max(g0 * std::pow(t / spec.drift_t0, -nu), spec.g_min);
}

double sample_drift_exponent(const DeviceModelSpec& spec, Rng& rng) {
  if (spec.drift_nu_std <= 0.0) return spec.drift_nu_mean;
  std::normal_distribution<double> nu(spec.drift_nu_mean, spec.drift_nu_std);
  return std::max(0.0, nu(rng));
}

double read_conductance(double g_stored, double t, const DeviceModelSpec& spec, double nu,
                        Rng& rng) {
  const double g = apply_drift(g_stored, t, spec, nu);
  if (spec.read_noise_frac <= 0.0) return g;
  std::normal_distribution<double> eta(0.0, spec.read_noise_frac);
  return std::max(0.0, g * (1.0 + eta(rng)));
}

}  // namespace memsim
