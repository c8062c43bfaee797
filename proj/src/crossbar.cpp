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

#include "memsim/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace memsim {

void ConverterSpec::validate() const {
  if (dac_bits < 1 || adc_bits < 1) throw std::invalid_argument("converters: bits must be >= 1");
  if (!(input_clip > 0.0) || !(output_clip > 0.0)) {
    throw std::invalid_argument("converters: clip bounds must be > 0");
  }
  if (!(output_noise_std >= 0.0)) throw std::invalid_argument("converters: output noise < 0");
  if (max_bound_iterations < 0) throw std::invalid_argument("converters: bound iterations < 0");
}

ConverterSpec ConverterSpec::ideal(int bits) {
  ConverterSpec c;
  c.dac_bits = bits;
  c.adc_bits = bits;
  c.output_noise_std = 0.0;
  return c;
}

FaultMask::FaultMask(TileShape shape) : shape_(shape), flags_(shape.device_count(), 0) {}

void FaultMask::set(std::size_t device, bool value) {
  const auto v = static_cast<std::uint8_t>(value);
  if (flags_.at(device) == v) return;
  flags_[device] = v;
  count_ = value ? count_ + 1 : count_ - 1;
}

std::vector<std::size_t> FaultMask::stuck_devices() const {
  std::vector<std::size_t> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i]) out.push_back(i);
  }
  return out;
}

bool FaultMask::subset_of(const FaultMask& other) const {
  if (!(shape_ == other.shape_)) return false;
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i] && !other.flags_[i]) return false;
  }
  return true;
}

double CrossbarTile::mean_read(std::size_t device, double t) const {
  if (fault_mask.stuck(device)) return spec.g_min;
  const ConductancePair& p = programmed[device / 2];
  const double g = (device % 2 == 0) ? p.g_plus : p.g_minus;
  return apply_drift(g, t, spec, nu[device]);
}

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void program_rows(CrossbarTile& tile, const Matrix& weights, Rng& rng) {
  const TileShape& sh = tile.shape;
  const DeviceModelSpec& spec = tile.spec;
  const std::uint64_t base = rng();
  const bool sample_nu = spec.drift_nu_std > 0.0;
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(sh.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    Rng row_rng(derive_seed(base, static_cast<std::uint64_t>(r)));
    for (std::size_t c = 0; c < sh.cols; ++c) {
      const double w = weights(static_cast<std::size_t>(r), c);
      const double g_on = std::min(spec.g_min + std::abs(w) * tile.weight_scale, spec.g_max);
      const ConductancePair target =
          w >= 0.0 ? ConductancePair{g_on, spec.g_min} : ConductancePair{spec.g_min, g_on};
      for (std::size_t s = 0; s < sh.slices; ++s) {
        const std::size_t k = sh.pair_index(static_cast<std::size_t>(r), c, s);
        tile.targets[k] = target;
        tile.programmed[k] = {program_conductance(target.g_plus, spec, row_rng),
                              program_conductance(target.g_minus, spec, row_rng)};
        tile.nu[2 * k] = sample_nu ? sample_drift_exponent(spec, row_rng) : spec.drift_nu_mean;
        tile.nu[2 * k + 1] =
            sample_nu ? sample_drift_exponent(spec, row_rng) : spec.drift_nu_mean;
      }
    }
  }
}

}  // namespace

CrossbarTile map_weights(const Matrix& weights, const DeviceModelSpec& spec,
                         const ConverterSpec& converters, std::size_t slices, Rng& rng,
                         double ir_drop_r) {
  spec.validate();
  converters.validate();
  if (weights.empty()) throw std::invalid_argument("map_weights: empty weight matrix");
  if (slices < 1) throw std::invalid_argument("map_weights: slices must be >= 1");
  if (!(ir_drop_r >= 0.0)) throw std::invalid_argument("map_weights: ir_drop_r < 0");

  CrossbarTile tile;
  tile.shape = {weights.rows(), weights.cols(), slices};
  tile.targets.resize(tile.shape.pair_count());
  tile.programmed.resize(tile.shape.pair_count());
  tile.nu.resize(tile.shape.device_count());
  tile.spec = spec;
  tile.converters = converters;
  tile.fault_mask = FaultMask(tile.shape);
  tile.ir_drop_r = ir_drop_r;
  reprogram_tile(tile, weights, rng);
  return tile;
}

void reprogram_tile(CrossbarTile& tile, const Matrix& weights, Rng& rng) {
  if (weights.rows() != tile.shape.rows || weights.cols() != tile.shape.cols) {
    throw std::invalid_argument("reprogram_tile: weight shape does not match tile");
  }
  for (double w : weights.data()) {
    if (!std::isfinite(w)) throw std::invalid_argument("map_weights: non-finite weight");
  }
  const double wmax = max_abs(weights.data());
  const double range = tile.spec.g_max - tile.spec.g_min;
  tile.weight_scale = wmax > 0.0 ? range / wmax : range;
  program_rows(tile, weights, rng);
}

double quantize(double x, int bits, double clip) {
  if (!std::isfinite(x)) throw std::invalid_argument("quantize: non-finite input");
  if (bits < 1 || !(clip > 0.0)) throw std::invalid_argument("quantize: bad bits or clip");
  const double clamped = std::clamp(x, -clip, clip);
  if (bits == 1) return 0.0;
  // 2^bits - 1 levels: k * clip / half for k in [-half, half].
  const double half = std::ldexp(1.0, bits - 1) - 1.0;
  const double k = std::round(clamped / clip * half);
  return k / half * clip;  // exact at the endpoints
}

FaultMask sample_fault_mask(TileShape shape, double ratio, Rng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("sample_fault_mask: ratio outside [0, 1]");
  }
  FaultMask mask(shape);
  const std::size_t n = shape.device_count();
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (k == 0) return mask;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k entries are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
    mask.set(idx[i], true);
  }
  return mask;
}

Matrix effective_weights(const CrossbarTile& tile, double t) {
  const TileShape& sh = tile.shape;
  Matrix w(sh.rows, sh.cols);
  const double inv = 1.0 / (tile.weight_scale * static_cast<double>(sh.slices));
  for (std::size_t r = 0; r < sh.rows; ++r) {
    for (std::size_t c = 0; c < sh.cols; ++c) {
      double acc = 0.0;
      for (std::size_t s = 0; s < sh.slices; ++s) {
        const std::size_t k = sh.pair_index(r, c, s);
        acc += tile.mean_read(2 * k, t) - tile.mean_read(2 * k + 1, t);
      }
      w(r, c) = acc * inv;
    }
  }
  return w;
}

namespace detail {

// Per (slice, column) IR-drop attenuation 1 / (1 + R * sum_i g_total), with
// conductances in uS and R in ohm. Indexed s * cols + c.
std::vector<double> ir_attenuation(const CrossbarTile& tile, double t) {
  const TileShape& sh = tile.shape;
  std::vector<double> att(sh.slices * sh.cols, 1.0);
  if (tile.ir_drop_r <= 0.0) return att;
  std::vector<double> gsum(sh.slices * sh.cols, 0.0);
  for (std::size_t r = 0; r < sh.rows; ++r) {
    for (std::size_t c = 0; c < sh.cols; ++c) {
      for (std::size_t s = 0; s < sh.slices; ++s) {
        const std::size_t k = sh.pair_index(r, c, s);
        gsum[s * sh.cols + c] += tile.mean_read(2 * k, t) + tile.mean_read(2 * k + 1, t);
      }
    }
  }
  for (std::size_t i = 0; i < att.size(); ++i) att[i] = 1.0 / (1.0 + tile.ir_drop_r * 1e-6 * gsum[i]);
  return att;
}

}  // namespace detail

TileReadout make_readout(const CrossbarTile& tile, double t) {
  const TileShape& sh = tile.shape;
  const DeviceModelSpec& spec = tile.spec;
  TileReadout out;
  out.rows = sh.rows;
  out.cols = sh.cols;
  out.mean.assign(sh.rows * sh.cols, 0.0);
  out.var.assign(sh.rows * sh.cols, 0.0);
  out.converters = tile.converters;
  const double range = spec.g_max - spec.g_min;
  out.output_scale = range / tile.weight_scale;

  const std::vector<double> att = detail::ir_attenuation(tile, t);
  const double inv_mean = 1.0 / (range * static_cast<double>(sh.slices));
  const double sr = spec.read_noise_frac;
  const double inv_var = sr * sr * inv_mean * inv_mean;
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(sh.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ri = 0; ri < rows; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    for (std::size_t c = 0; c < sh.cols; ++c) {
      double m = 0.0;
      double v = 0.0;
      for (std::size_t s = 0; s < sh.slices; ++s) {
        const std::size_t k = sh.pair_index(r, c, s);
        const double a = att[s * sh.cols + c];
        const double gp = tile.mean_read(2 * k, t);
        const double gm = tile.mean_read(2 * k + 1, t);
        m += a * (gp - gm);
        // Stuck devices read exactly g_min and carry no read noise.
        const double vp = tile.fault_mask.stuck(2 * k) ? 0.0 : gp * gp;
        const double vm = tile.fault_mask.stuck(2 * k + 1) ? 0.0 : gm * gm;
        v += a * a * (vp + vm);
      }
      out.mean[r * sh.cols + c] = m * inv_mean;
      out.var[r * sh.cols + c] = v * inv_var;
    }
  }
  return out;
}

}  // namespace memsim
