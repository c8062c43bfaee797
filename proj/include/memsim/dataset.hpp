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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "memsim/matrix.hpp"

namespace memsim {

/// State (y, vy, z, vz, theta) and unit thrust direction (u1, u2).
struct Sample {
  std::array<double, 5> state{};
  std::array<double, 2> control{};
  friend bool operator==(const Sample&, const Sample&) = default;
};

inline constexpr std::size_t kStateSize = 5;
inline constexpr std::size_t kControlSize = 2;

struct Dataset {
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  const Sample& operator[](std::size_t i) const { return samples[i]; }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Sampling ranges for the synthetic guidance database. Positions and
/// velocities are drawn from [-range, range]; time-to-go from
/// [t_go_min, t_go_max].
struct OracleParams {
  double t_go_min = 0.9;
  double t_go_max = 1.1;
  double position_range = 1.0;
  double velocity_range = 1.0;
  double min_accel = 1e-3;

  void validate() const;
  friend bool operator==(const OracleParams&, const OracleParams&) = default;
};

class DegenerateSampleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Energy-optimal rest-to-origin acceleration for a planar double
/// integrator: a = -6/t_go^2 * p - 4/t_go * v.
std::array<double, 2> optimal_acceleration(const std::array<double, 5>& state, double t_go);

/// Unit direction of optimal_acceleration. Throws DegenerateSampleError
/// when |a| < min_accel.
std::array<double, 2> oracle_control(const std::array<double, 5>& state, double t_go,
                                     double min_accel = OracleParams{}.min_accel);

Dataset generate_dataset(std::size_t n, const OracleParams& params, std::uint64_t seed);

/// Shuffled disjoint partition; the second set has round(val_fraction * n)
/// samples.
std::pair<Dataset, Dataset> split(const Dataset& data, double val_fraction, std::uint64_t seed);

/// atan2(u2, u1). Throws DegenerateSampleError for |u| <= 1e-12.
double control_to_angle(const std::array<double, 2>& u);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// n x 5 inputs and n x 2 targets.
Matrix input_matrix(const Dataset& data);
Matrix target_matrix(const Dataset& data);

}  // namespace memsim
