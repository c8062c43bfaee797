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

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "memsim/experiments.hpp"

using namespace memsim;

namespace {

struct Options {
  std::string config;
  std::string preset;
  std::string experiment;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string technology;
  std::optional<std::size_t> epochs;
};

ExperimentConfig resolve(const Options& o) {
  json j = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config '" + o.config + "'");
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config '" + o.config + "': " + e.what());
    }
  }
  if (!o.preset.empty()) j["preset"] = o.preset;
  if (!o.experiment.empty()) j["experiment"] = o.experiment;
  if (o.seed) j["seed"] = *o.seed;
  if (!o.out.empty()) j["out_dir"] = o.out;
  if (!o.technology.empty()) j["technology"] = o.technology;
  if (o.epochs) j["train"]["epochs"] = *o.epochs;
  ExperimentConfig cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

void print_records(const std::vector<ResultRecord>& records) {
  std::cout << results_csv(records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memristive crossbar simulator for guidance-and-control networks"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--preset", o.preset, "desk or full (default desk)");
  app.add_option("--experiment", o.experiment,
                 "baseline, slice_sweep, fault_sweep, drift_eval or transfer_profile");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--technology", o.technology, "pcm, rram or both");
  app.add_option("--epochs", o.epochs, "training epochs");

  auto* gen = app.add_subcommand("gen-data", "write dataset.csv, train.csv and val.csv");
  auto* run = app.add_subcommand("run", "run the experiment named by --experiment or the config");
  const std::pair<const char*, const char*> fixed[] = {
      {"baseline", "train the digital baseline"},
      {"sweep-slices", "HWA-train and evaluate across slice counts"},
      {"sweep-faults", "stuck-at-g_min fault sweep with optional retraining"},
      {"drift", "evaluate the trained network at increasing drift times"},
      {"transfer", "closed-loop transfer profile (digital vs analog)"}};
  for (const auto& [name, help] : fixed) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name != "run" && name != "gen-data") {
      if (!o.experiment.empty() && parse_experiment(o.experiment) != parse_experiment(name)) {
        throw ConfigError("--experiment " + o.experiment + " conflicts with subcommand " + name);
      }
      o.experiment = name;
    }
    ExperimentConfig cfg = resolve(o);
    if (sub == gen) {
      ExperimentContext ctx(cfg);
      run_gen_data(ctx);
      std::cout << "wrote " << ctx.train_set().size() + ctx.val_set().size() << " samples to "
                << cfg.out_dir.string() << '\n';
      return 0;
    }
    (void)run;
    const auto records = run_experiment(cfg);
    if (records.empty()) {
      std::cout << "wrote " << (cfg.out_dir / "transfer.csv").string() << '\n';
    } else {
      print_records(records);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "memsim: error: " << e.what() << '\n';
    return 1;
  }
}
