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

// Analog MVM kernels. mvm_reference reads every device individually and is
// the literal pipeline; mvm works on a precomputed readout and draws one
// aggregated noise sample per column. Both share the converter stage below.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "memsim/crossbar.hpp"

namespace memsim {

namespace detail {
std::vector<double> ir_attenuation(const CrossbarTile& tile, double t);
}

namespace {

// DAC -> analog core -> ADC with iterative bound management. `core` fills
// normalized, noisy column outputs for a quantized normalized input.
template <typename Core>
std::vector<double> converter_pipeline(std::span<const double> x, std::size_t cols,
                                       double output_scale, const ConverterSpec& conv,
                                       Core&& core) {
  double in_max = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("mvm: non-finite input");
    in_max = std::max(in_max, std::abs(v));
  }
  std::vector<double> y(cols, 0.0);
  if (in_max == 0.0) return y;

  double s_in = in_max / conv.input_clip;
  std::vector<double> xq(x.size());
  for (int iter = 0;; ++iter) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      xq[i] = quantize(x[i] / s_in, conv.dac_bits, conv.input_clip);
    }
    core(xq, y);
    const bool saturated = std::any_of(y.begin(), y.end(), [&](double v) {
      return std::abs(v) > conv.output_clip;
    });
    if (!saturated || iter >= conv.max_bound_iterations) break;
    s_in *= 2.0;
  }
  const double denorm = s_in * output_scale;
  for (double& v : y) v = quantize(v, conv.adc_bits, conv.output_clip) * denorm;
  return y;
}

}  // namespace

std::vector<double> mvm_reference(const CrossbarTile& tile, std::span<const double> x,
                                  double t, Rng& rng) {
  const TileShape& sh = tile.shape;
  if (x.size() != sh.rows) throw std::invalid_argument("mvm: input length != tile rows");
  const DeviceModelSpec& spec = tile.spec;
  const ConverterSpec& conv = tile.converters;
  const double range = spec.g_max - spec.g_min;
  const std::vector<double> att = detail::ir_attenuation(tile, t);

  auto read = [&](std::size_t device) {
    if (tile.fault_mask.stuck(device)) return spec.g_min;
    const ConductancePair& p = tile.programmed[device / 2];
    const double g = (device % 2 == 0) ? p.g_plus : p.g_minus;
    return read_conductance(g, t, spec, tile.nu[device], rng);
  };

  std::normal_distribution<double> out_noise(0.0, 1.0);
  auto core = [&](const std::vector<double>& xq, std::vector<double>& y) {
    std::vector<double> current(sh.slices * sh.cols, 0.0);
    for (std::size_t r = 0; r < sh.rows; ++r) {
      for (std::size_t c = 0; c < sh.cols; ++c) {
        for (std::size_t s = 0; s < sh.slices; ++s) {
          const std::size_t k = sh.pair_index(r, c, s);
          const double gp = read(2 * k);
          const double gm = read(2 * k + 1);
          current[s * sh.cols + c] += xq[r] * (gp - gm);
        }
      }
    }
    for (std::size_t c = 0; c < sh.cols; ++c) {
      double acc = 0.0;
      for (std::size_t s = 0; s < sh.slices; ++s) acc += att[s * sh.cols + c] * current[s * sh.cols + c];
      y[c] = acc / (static_cast<double>(sh.slices) * range);
      if (conv.output_noise_std > 0.0) y[c] += conv.output_noise_std * out_noise(rng);
    }
  };
  return converter_pipeline(x, sh.cols, range / tile.weight_scale, conv, core);
}

std::vector<double> mvm(const TileReadout& ro, std::span<const double> x, Rng& rng) {
  if (x.size() != ro.rows) throw std::invalid_argument("mvm: input length != tile rows");
  const ConverterSpec& conv = ro.converters;
  const double out_var = conv.output_noise_std * conv.output_noise_std;
  std::vector<double> var(ro.cols);
  std::normal_distribution<double> z(0.0, 1.0);

  auto core = [&](const std::vector<double>& xq, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    std::fill(var.begin(), var.end(), out_var);
    for (std::size_t r = 0; r < ro.rows; ++r) {
      const double xi = xq[r];
      if (xi == 0.0) continue;
      const double xi2 = xi * xi;
      const double* m = ro.mean.data() + r * ro.cols;
      const double* v = ro.var.data() + r * ro.cols;
      for (std::size_t c = 0; c < ro.cols; ++c) {
        y[c] += xi * m[c];
        var[c] += xi2 * v[c];
      }
    }
    for (std::size_t c = 0; c < ro.cols; ++c) {
      if (var[c] > 0.0) y[c] += std::sqrt(var[c]) * z(rng);
    }
  };
  return converter_pipeline(x, ro.cols, ro.output_scale, conv, core);
}

}  // namespace memsim
