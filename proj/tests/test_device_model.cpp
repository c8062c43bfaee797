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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "memsim/device_model.hpp"

namespace memsim {
namespace {

double sample_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

TEST(DeviceModel, PresetsMatchDefaults) {
  const auto pcm = pcm_preset();
  EXPECT_EQ(pcm.technology, Technology::PCM);
  EXPECT_DOUBLE_EQ(pcm.read_noise_frac, 0.02);
  EXPECT_DOUBLE_EQ(pcm.g_min, 0.1);
  EXPECT_DOUBLE_EQ(pcm.g_max, 25.0);
  const auto rram = rram_preset();
  EXPECT_EQ(rram.technology, Technology::RRAM);
  EXPECT_DOUBLE_EQ(rram.read_noise_frac, 0.01);
  EXPECT_LT(rram.drift_nu_mean, pcm.drift_nu_mean);
  EXPECT_EQ(device_preset("PCM"), pcm);
  EXPECT_EQ(device_preset("rram"), rram);
  EXPECT_THROW(device_preset("mram"), std::invalid_argument);
}

TEST(DeviceModel, ValidateRejectsBadSpecs) {
  auto s = pcm_preset();
  s.g_min = 30.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = pcm_preset();
  s.read_noise_frac = -0.1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = pcm_preset();
  s.drift_t0 = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = pcm_preset();
  s.drift_nu_mean = -0.01;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(ProgramConductance, ZeroNoiseIsIdentity) {
  auto s = pcm_preset();
  s.prog_noise_a = 0.0;
  s.prog_noise_b = 0.0;
  Rng rng(1);
  EXPECT_DOUBLE_EQ(program_conductance(10.0, s, rng), 10.0);
}

TEST(ProgramConductance, ClampsToWindow) {
  auto s = pcm_preset();
  s.prog_noise_a = 5.0;
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const double g = program_conductance(s.g_max, s, rng);
    EXPECT_LE(g, s.g_max);
    EXPECT_GE(g, s.g_min);
  }
}

TEST(ProgramConductance, OutOfRangeTargetThrows) {
  const auto s = pcm_preset();
  Rng rng(3);
  EXPECT_THROW(program_conductance(s.g_max + 1.0, s, rng), std::invalid_argument);
  EXPECT_THROW(program_conductance(0.0, s, rng), std::invalid_argument);
}

TEST(ProgramConductance, MonteCarloSigma) {
  auto s = pcm_preset();
  s.prog_noise_a = 0.2;
  s.prog_noise_b = 0.02;
  EXPECT_DOUBLE_EQ(programming_sigma(10.0, s), 0.4);
  Rng rng(4);
  std::vector<double> g(100000);
  for (auto& v : g) v = program_conductance(10.0, s, rng);
  const double sd = sample_std(g);
  EXPECT_GE(sd, 0.38);
  EXPECT_LE(sd, 0.42);
}

TEST(ApplyDrift, IdentityCases) {
  const auto s = pcm_preset();
  EXPECT_DOUBLE_EQ(apply_drift(10.0, s.drift_t0, s, 0.05), 10.0);
  EXPECT_DOUBLE_EQ(apply_drift(10.0, 0.0, s, 0.05), 10.0);
  for (double t : {1.0, 10.0, 1e6}) EXPECT_DOUBLE_EQ(apply_drift(10.0, t, s, 0.0), 10.0);
}

TEST(ApplyDrift, PowerLawValue) {
  const auto s = pcm_preset();
  // 10 * 100^-0.05 = 10 * exp(-0.05 ln 100)
  const double expected = 10.0 * std::exp(-0.05 * std::log(100.0));
  EXPECT_NEAR(apply_drift(10.0, 100.0, s, 0.05), expected, 1e-12);
  EXPECT_NEAR(apply_drift(10.0, 100.0, s, 0.05), 7.9433, 5e-5);
}

TEST(ApplyDrift, FlooredAtGmin) {
  const auto s = pcm_preset();
  EXPECT_DOUBLE_EQ(apply_drift(0.2, 1e12, s, 0.5), s.g_min);
}

TEST(ApplyDrift, BelowCalibrationTimeThrows) {
  const auto s = pcm_preset();
  EXPECT_THROW(apply_drift(10.0, 0.5, s, 0.05), std::invalid_argument);
}

TEST(DriftExponent, NonNegativeWithConfiguredMoments) {
  auto s = pcm_preset();
  Rng rng(5);
  double sum = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double nu = sample_drift_exponent(s, rng);
    EXPECT_GE(nu, 0.0);
    sum += nu;
  }
  EXPECT_NEAR(sum / n, s.drift_nu_mean, 2e-5);
  s.drift_nu_mean = 0.0;
  s.drift_nu_std = 0.1;
  for (int i = 0; i < 1000; ++i) EXPECT_GE(sample_drift_exponent(s, rng), 0.0);
}

TEST(ReadConductance, NoiseFreeIdentity) {
  auto s = pcm_preset().noise_free();
  Rng rng(6);
  EXPECT_DOUBLE_EQ(read_conductance(12.5, 0.0, s, 0.0, rng), 12.5);
}

TEST(ReadConductance, MonteCarloReadNoise) {
  struct Case {
    DeviceModelSpec spec;
    double lo, hi;
  };
  for (const auto& c : {Case{pcm_preset(), 0.19, 0.21}, Case{rram_preset(), 0.095, 0.105}}) {
    Rng rng(7);
    std::vector<double> g(100000);
    for (auto& v : g) v = read_conductance(10.0, 0.0, c.spec, 0.0, rng);
    const double sd = sample_std(g);
    EXPECT_GE(sd, c.lo) << to_string(c.spec.technology);
    EXPECT_LE(sd, c.hi) << to_string(c.spec.technology);
  }
}

TEST(ReadConductance, NeverNegative) {
  auto s = pcm_preset();
  s.read_noise_frac = 2.0;
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) EXPECT_GE(read_conductance(s.g_min, 0.0, s, 0.0, rng), 0.0);
}

TEST(Technology, ParseRoundTrip) {
  for (auto t : {Technology::PCM, Technology::RRAM}) EXPECT_EQ(parse_technology(to_string(t)), t);
  EXPECT_THROW(parse_technology("flash"), std::invalid_argument);
}

}  // namespace
}  // namespace memsim
