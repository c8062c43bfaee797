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

// JSON mapping of the configuration structs. Reading only overrides the keys
// that are present and rejects unknown keys, so a config file may be sparse.

#include <json.hpp>

#include "memsim/crossbar.hpp"
#include "memsim/dataset.hpp"
#include "memsim/device_model.hpp"
#include "memsim/network.hpp"
#include "memsim/training.hpp"

namespace memsim {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void to_json(json& j, const DeviceModelSpec& s);
void from_json(const json& j, DeviceModelSpec& s);
void to_json(json& j, const ConverterSpec& s);
void from_json(const json& j, ConverterSpec& s);
void to_json(json& j, const NetworkSpec& s);
void from_json(const json& j, NetworkSpec& s);
void to_json(json& j, const AnalogConfig& s);
void from_json(const json& j, AnalogConfig& s);
void to_json(json& j, const TrainConfig& s);
void from_json(const json& j, TrainConfig& s);
void to_json(json& j, const OracleParams& s);
void from_json(const json& j, OracleParams& s);

/// Throws ConfigError naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* context);

}  // namespace memsim
