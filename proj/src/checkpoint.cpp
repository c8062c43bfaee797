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

#include "memsim/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "memsim/config.hpp"

namespace memsim {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'M', 'E', 'M', 'S', 'I', 'M', 'C', 'K'};

class PayloadWriter {
 public:
  json directory = json::array();
  std::string bytes;

  void add(const std::string& name, std::span<const double> v) {
    append(name, "f64", v.size(), v.data(), v.size_bytes());
  }
  void add(const std::string& name, std::span<const std::uint8_t> v) {
    append(name, "u8", v.size(), v.data(), v.size_bytes());
  }

 private:
  void append(const std::string& name, const char* dtype, std::size_t count, const void* data,
              std::size_t n) {
    directory.push_back({{"name", name}, {"dtype", dtype}, {"count", count},
                         {"offset", bytes.size()}});
    bytes.append(static_cast<const char*>(data), n);
  }
};

class PayloadReader {
 public:
  PayloadReader(const json& directory, std::string bytes) : bytes_(std::move(bytes)) {
    for (const auto& e : directory) entries_[e.at("name").get<std::string>()] = e;
  }

  std::vector<double> f64(const std::string& name, std::size_t expected) const {
    std::vector<double> v(expected);
    copy(name, "f64", expected, v.data(), expected * sizeof(double));
    return v;
  }
  std::vector<std::uint8_t> u8(const std::string& name, std::size_t expected) const {
    std::vector<std::uint8_t> v(expected);
    copy(name, "u8", expected, v.data(), expected);
    return v;
  }

 private:
  void copy(const std::string& name, const char* dtype, std::size_t count, void* dst,
            std::size_t n) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) throw std::runtime_error("checkpoint: missing array '" + name + "'");
    const json& e = it->second;
    if (e.at("dtype") != dtype || e.at("count").get<std::size_t>() != count) {
      throw std::runtime_error("checkpoint: array '" + name + "' has unexpected type or size");
    }
    const auto off = e.at("offset").get<std::size_t>();
    if (off + n > bytes_.size()) throw std::runtime_error("checkpoint: truncated payload");
    std::memcpy(dst, bytes_.data() + off, n);
  }

  std::string bytes_;
  std::map<std::string, json> entries_;
};

std::span<const double> pair_span(const std::vector<ConductancePair>& v) {
  static_assert(sizeof(ConductancePair) == 2 * sizeof(double));
  return {reinterpret_cast<const double*>(v.data()), 2 * v.size()};
}

}  // namespace

void save_checkpoint(const AnalogNetwork& net, const SeedLineage& lineage,
                     const std::filesystem::path& path) {
  PayloadWriter payload;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const std::string p = "layer" + std::to_string(l);
    payload.add(p + ".weights", net.layers()[l].weights.data());
    payload.add(p + ".bias", std::span<const double>(net.layers()[l].bias));
  }
  json tiles = json::array();
  for (std::size_t l = 0; l < net.tiles().size(); ++l) {
    json layer = json::array();
    const AnalogLayer& al = net.tiles()[l];
    for (std::size_t k = 0; k < al.tiles.size(); ++k) {
      const CrossbarTile& t = al.tiles[k];
      const std::string p = "tile" + std::to_string(l) + "." + std::to_string(k);
      std::vector<std::uint8_t> faults(t.shape.device_count());
      for (std::size_t d = 0; d < faults.size(); ++d) faults[d] = t.fault_mask.stuck(d);
      payload.add(p + ".targets", pair_span(t.targets));
      payload.add(p + ".programmed", pair_span(t.programmed));
      payload.add(p + ".nu", std::span<const double>(t.nu));
      payload.add(p + ".faults", std::span<const std::uint8_t>(faults));
      layer.push_back({{"row_offset", al.row_offsets[k]},
                       {"rows", t.shape.rows},
                       {"cols", t.shape.cols},
                       {"slices", t.shape.slices},
                       {"weight_scale", t.weight_scale}});
    }
    tiles.push_back(std::move(layer));
  }

  const json header = {
      {"format", "memsim-checkpoint"},
      {"version", kCheckpointVersion},
      {"network", net.spec()},
      {"analog", net.analog()},
      {"device_preset", net.analog().device_preset},
      {"slices", net.analog().slices},
      {"lineage",
       {{"master_seed", lineage.master_seed},
        {"path", lineage.path},
        {"fingerprint", lineage.fingerprint},
        {"programming_seed", net.programming_seed}}},
      {"programmed", net.programmed()},
      {"tiles", tiles},
      {"arrays", payload.directory}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t len = text.size();
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(payload.bytes.data(), static_cast<std::streamsize>(payload.bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error("'" + path.string() + "' is not a memsim checkpoint");
  }
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint version " + std::to_string(version) + " not supported");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!in.eof() && !in) throw std::runtime_error("checkpoint: truncated header");

  const json header = json::parse(text);
  NetworkSpec spec;
  from_json(header.at("network"), spec);
  AnalogConfig analog;
  from_json(header.at("analog"), analog);
  PayloadReader payload(header.at("arrays"), std::move(bytes));

  Checkpoint ck{AnalogNetwork(spec, analog), {}};
  AnalogNetwork& net = ck.net;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const std::string p = "layer" + std::to_string(l);
    DenseLayer& layer = net.layers()[l];
    const auto w = payload.f64(p + ".weights", layer.weights.size());
    std::copy(w.begin(), w.end(), layer.weights.data().begin());
    layer.bias = payload.f64(p + ".bias", layer.bias.size());
  }
  if (header.at("programmed").get<bool>()) {
    const json& tiles = header.at("tiles");
    net.tiles().resize(net.layers().size());
    for (std::size_t l = 0; l < tiles.size(); ++l) {
      for (std::size_t k = 0; k < tiles[l].size(); ++k) {
        const json& tj = tiles[l][k];
        const std::string p = "tile" + std::to_string(l) + "." + std::to_string(k);
        CrossbarTile t;
        t.shape = {tj.at("rows").get<std::size_t>(), tj.at("cols").get<std::size_t>(),
                   tj.at("slices").get<std::size_t>()};
        t.weight_scale = tj.at("weight_scale").get<double>();
        t.spec = analog.device;
        t.converters = analog.converters;
        t.ir_drop_r = analog.ir_drop_r;
        const std::size_t pairs = t.shape.pair_count();
        auto unpack = [&](const std::string& name) {
          const auto flat = payload.f64(name, 2 * pairs);
          std::vector<ConductancePair> v(pairs);
          for (std::size_t i = 0; i < pairs; ++i) v[i] = {flat[2 * i], flat[2 * i + 1]};
          return v;
        };
        t.targets = unpack(p + ".targets");
        t.programmed = unpack(p + ".programmed");
        t.nu = payload.f64(p + ".nu", t.shape.device_count());
        t.fault_mask = FaultMask(t.shape);
        const auto faults = payload.u8(p + ".faults", t.shape.device_count());
        for (std::size_t d = 0; d < faults.size(); ++d) {
          if (faults[d]) t.fault_mask.set(d, true);
        }
        net.tiles()[l].row_offsets.push_back(tj.at("row_offset").get<std::size_t>());
        net.tiles()[l].tiles.push_back(std::move(t));
      }
    }
  }
  const json& lin = header.at("lineage");
  ck.lineage.master_seed = lin.at("master_seed").get<std::uint64_t>();
  ck.lineage.path = lin.at("path").get<std::string>();
  ck.lineage.fingerprint = lin.at("fingerprint").get<std::string>();
  net.programming_seed = lin.at("programming_seed").get<std::uint64_t>();
  return ck;
}

}  // namespace memsim
