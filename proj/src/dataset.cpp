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

#include "memsim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "memsim/format.hpp"
#include "memsim/rng.hpp"

namespace memsim {

void OracleParams::validate() const {
  if (!(t_go_min > 0.0)) throw std::invalid_argument("oracle: t_go_min must be > 0");
  if (!(t_go_max >= t_go_min)) throw std::invalid_argument("oracle: empty t_go range");
  if (!(position_range > 0.0) || !(velocity_range > 0.0)) {
    throw std::invalid_argument("oracle: empty state range");
  }
  if (!(min_accel > 0.0)) throw std::invalid_argument("oracle: min_accel must be > 0");
}

std::array<double, 2> optimal_acceleration(const std::array<double, 5>& s, double t_go) {
  if (!(t_go > 0.0)) throw std::invalid_argument("oracle: t_go must be > 0");
  const double kp = 6.0 / (t_go * t_go);
  const double kv = 4.0 / t_go;
  return {-kp * s[0] - kv * s[1], -kp * s[2] - kv * s[3]};
}

std::array<double, 2> oracle_control(const std::array<double, 5>& state, double t_go,
                                     double min_accel) {
  const auto a = optimal_acceleration(state, t_go);
  const double norm = std::hypot(a[0], a[1]);
  if (norm < min_accel) throw DegenerateSampleError("oracle: acceleration below threshold");
  return {a[0] / norm, a[1] / norm};
}

Dataset generate_dataset(std::size_t n, const OracleParams& params, std::uint64_t seed) {
  params.validate();
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  Dataset data;
  data.samples.resize(n);
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> pos(-params.position_range, params.position_range);
    std::uniform_real_distribution<double> vel(-params.velocity_range, params.velocity_range);
    std::uniform_real_distribution<double> tgo(params.t_go_min, params.t_go_max);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    Sample& s = data.samples[static_cast<std::size_t>(i)];
    for (;;) {
      s.state = {pos(rng), vel(rng), pos(rng), vel(rng), ang(rng)};
      try {
        s.control = oracle_control(s.state, tgo(rng), params.min_accel);
        break;
      } catch (const DegenerateSampleError&) {
        // redraw
      }
    }
  }
  return data;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("split: val_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_val =
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(data.size())));
  std::pair<Dataset, Dataset> out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (k < n_val ? out.second : out.first).samples.push_back(data.samples[idx[k]]);
  }
  return out;
}

double control_to_angle(const std::array<double, 2>& u) {
  if (std::hypot(u[0], u[1]) <= 1e-12) throw DegenerateSampleError("control_to_angle: zero vector");
  return std::atan2(u[1], u[0]);
}

namespace {

constexpr std::array<const char*, 7> kColumns{"y", "vy", "z", "vz", "theta", "u1", "u2"};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const Sample& s : data.samples) {
    for (std::size_t i = 0; i < 5; ++i) out << format_double(s.state[i]) << ',';
    out << format_double(s.control[0]) << ',' << format_double(s.control[1]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "no samples");
  strip_cr(line);
  const auto header = split_fields(line);
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (i >= header.size() || header[i] != kColumns[i]) {
      throw ParseError(1, std::string("missing column '") + kColumns[i] + "'");
    }
  }
  if (header.size() != kColumns.size()) throw ParseError(1, "unexpected extra columns");

  Dataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != kColumns.size()) {
      throw ParseError(lineno, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    Sample s;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v = 0.0;
      const char* b = fields[i].data();
      const char* e = b + fields[i].size();
      const auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
        throw ParseError(lineno, std::string("bad value in column '") + kColumns[i] + "'");
      }
      (i < 5 ? s.state[i] : s.control[i - 5]) = v;
    }
    data.samples.push_back(s);
  }
  if (data.empty()) throw ParseError(lineno, "no samples");
  return data;
}

Matrix input_matrix(const Dataset& data) {
  Matrix m(data.size(), kStateSize);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::copy(data[i].state.begin(), data[i].state.end(), m.row(i).begin());
  }
  return m;
}

Matrix target_matrix(const Dataset& data) {
  Matrix m(data.size(), kControlSize);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::copy(data[i].control.begin(), data[i].control.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace memsim
