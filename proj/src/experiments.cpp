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

#include "memsim/experiments.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "memsim/format.hpp"

namespace memsim {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Baseline:
      return "baseline";
    case ExperimentKind::SliceSweep:
      return "slice_sweep";
    case ExperimentKind::FaultSweep:
      return "fault_sweep";
    case ExperimentKind::DriftEval:
      return "drift_eval";
    case ExperimentKind::TransferProfile:
      return "transfer_profile";
  }
  return "unknown";
}

ExperimentKind parse_experiment(std::string_view name) {
  if (name == "baseline") return ExperimentKind::Baseline;
  if (name == "slice_sweep" || name == "sweep-slices") return ExperimentKind::SliceSweep;
  if (name == "fault_sweep" || name == "sweep-faults") return ExperimentKind::FaultSweep;
  if (name == "drift_eval" || name == "drift") return ExperimentKind::DriftEval;
  if (name == "transfer_profile" || name == "transfer") return ExperimentKind::TransferProfile;
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

std::vector<double> default_fault_ratios() {
  std::vector<double> r;
  for (int i = 1; i <= 10; ++i) r.push_back(i / 100.0);
  r.insert(r.end(), {0.2, 0.4, 0.8});
  return r;
}

ExperimentConfig::ExperimentConfig() : fault_ratios(default_fault_ratios()) {}

ExperimentConfig ExperimentConfig::desk() {
  ExperimentConfig c;
  c.train.epochs = 40;
  c.dataset.n_samples = 10000;
  return c;
}

ExperimentConfig ExperimentConfig::full() {
  ExperimentConfig c;
  c.train.epochs = 150;
  c.dataset.n_samples = 50000;
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
  if (technologies.empty()) fail("technology list is empty");
  if (slices_list.empty()) fail("slices_list is empty");
  if (fault_ratios.empty()) fail("fault_ratios is empty");
  if (drift_times_s.empty()) fail("drift_times_s is empty");
  for (std::size_t s : slices_list) {
    if (s < 1) fail("slices must be >= 1");
  }
  for (double r : fault_ratios) {
    if (!(r >= 0.0 && r <= 1.0)) fail("fault ratios must lie in [0, 1]");
  }
  for (Technology t : technologies) {
    for (double time : drift_times_s) {
      if (!(time == 0.0 || time >= device(t).drift_t0)) fail("drift times must be 0 or >= drift_t0");
    }
  }
  if (eval_repeats < 1) fail("eval_repeats must be >= 1");
  if (analog_slices < 1 || transfer.slices < 1) fail("slices must be >= 1");
  if (dataset.n_samples < 2) fail("dataset.n_samples must be >= 2");
  if (!(dataset.val_fraction > 0.0 && dataset.val_fraction < 1.0)) {
    fail("dataset.val_fraction must be in (0, 1)");
  }
  if (!(transfer.t_go > 0.0) || transfer.steps < 2) fail("transfer needs t_go > 0, steps >= 2");
  if (!(transfer.alpha > 0.0 && transfer.alpha <= 1.0)) fail("transfer.alpha must be in (0, 1]");
  if (network.input_size() != kStateSize || network.output_size() != kControlSize) {
    fail("network must map 5 state inputs to 2 control outputs");
  }
  network.validate();
  train.validate();
  oracle.validate();
  converters.validate();
  pcm.validate();
  rram.validate();
}

AnalogConfig ExperimentConfig::analog_config(Technology t, std::size_t slices) const {
  AnalogConfig a;
  a.device_preset = to_string(t);
  a.device = device(t);
  a.converters = converters;
  a.slices = slices;
  a.ir_drop_r = ir_drop_r;
  return a;
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"preset", "experiment", "technology", "slices_list", "fault_ratios",
                       "retrain", "retrain_epochs", "drift_times_s", "analog_slices",
                       "eval_repeats", "network", "train", "oracle", "dataset", "converters",
                       "ir_drop_r", "devices", "transfer", "seed", "out_dir"},
                      "config");
  const std::string preset = j.value("preset", std::string("desk"));
  ExperimentConfig c;
  if (preset == "desk") {
    c = ExperimentConfig::desk();
  } else if (preset == "full") {
    c = ExperimentConfig::full();
  } else {
    throw ConfigError("config: unknown preset '" + preset + "'");
  }
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("technology")) {
      const auto t = j.at("technology").get<std::string>();
      c.technologies = t == "both" ? std::vector<Technology>{Technology::PCM, Technology::RRAM}
                                   : std::vector<Technology>{parse_technology(t)};
    }
    if (j.contains("slices_list")) c.slices_list = j.at("slices_list").get<std::vector<std::size_t>>();
    if (j.contains("fault_ratios")) c.fault_ratios = j.at("fault_ratios").get<std::vector<double>>();
    if (j.contains("retrain")) c.retrain = j.at("retrain").get<bool>();
    if (j.contains("retrain_epochs")) c.retrain_epochs = j.at("retrain_epochs").get<std::size_t>();
    if (j.contains("drift_times_s")) c.drift_times_s = j.at("drift_times_s").get<std::vector<double>>();
    if (j.contains("analog_slices")) c.analog_slices = j.at("analog_slices").get<std::size_t>();
    if (j.contains("eval_repeats")) c.eval_repeats = j.at("eval_repeats").get<std::size_t>();
    if (j.contains("network")) from_json(j.at("network"), c.network);
    if (j.contains("train")) from_json(j.at("train"), c.train);
    if (j.contains("oracle")) from_json(j.at("oracle"), c.oracle);
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      reject_unknown_keys(d, {"n_samples", "val_fraction"}, "dataset");
      c.dataset.n_samples = d.value("n_samples", c.dataset.n_samples);
      c.dataset.val_fraction = d.value("val_fraction", c.dataset.val_fraction);
    }
    if (j.contains("converters")) from_json(j.at("converters"), c.converters);
    if (j.contains("ir_drop_r")) c.ir_drop_r = j.at("ir_drop_r").get<double>();
    if (j.contains("devices")) {
      const json& d = j.at("devices");
      reject_unknown_keys(d, {"pcm", "rram"}, "devices");
      if (d.contains("pcm")) from_json(d.at("pcm"), c.pcm);
      if (d.contains("rram")) from_json(d.at("rram"), c.rram);
    }
    if (j.contains("transfer")) {
      const json& t = j.at("transfer");
      reject_unknown_keys(t, {"t_go", "steps", "alpha", "slices"}, "transfer");
      c.transfer.t_go = t.value("t_go", c.transfer.t_go);
      c.transfer.steps = t.value("steps", c.transfer.steps);
      c.transfer.alpha = t.value("alpha", c.transfer.alpha);
      c.transfer.slices = t.value("slices", c.transfer.slices);
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json techs;
  if (c.technologies.size() == 2) {
    techs = "both";
  } else {
    techs = to_string(c.technologies.front());
  }
  json j = {{"experiment", to_string(c.experiment)},
            {"technology", techs},
            {"slices_list", c.slices_list},
            {"fault_ratios", c.fault_ratios},
            {"retrain", c.retrain},
            {"drift_times_s", c.drift_times_s},
            {"analog_slices", c.analog_slices},
            {"eval_repeats", c.eval_repeats},
            {"network", c.network},
            {"train", c.train},
            {"oracle", c.oracle},
            {"dataset", {{"n_samples", c.dataset.n_samples}, {"val_fraction", c.dataset.val_fraction}}},
            {"converters", c.converters},
            {"ir_drop_r", c.ir_drop_r},
            {"devices", {{"pcm", c.pcm}, {"rram", c.rram}}},
            {"transfer",
             {{"t_go", c.transfer.t_go},
              {"steps", c.transfer.steps},
              {"alpha", c.transfer.alpha},
              {"slices", c.transfer.slices}}},
            {"seed", c.seed},
            {"out_dir", c.out_dir.string()}};
  if (c.retrain_epochs) j["retrain_epochs"] = *c.retrain_epochs;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Result emission

std::string results_csv(std::span<const ResultRecord> records) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const auto& r : records) {
    out << r.experiment << ',' << r.technology << ',' << r.slices << ','
        << format_double(r.fault_ratio) << ',' << (r.retrained ? "true" : "false") << ','
        << format_double(r.t_seconds) << ',' << format_double17(r.loss) << ','
        << format_double17(r.loss_std) << ',' << r.seed << '\n';
  }
  return out.str();
}

json results_json(std::span<const ResultRecord> records) {
  json arr = json::array();
  for (const auto& r : records) {
    arr.push_back({{"experiment", r.experiment},
                   {"technology", r.technology},
                   {"slices", r.slices},
                   {"fault_ratio", r.fault_ratio},
                   {"retrained", r.retrained},
                   {"t_seconds", r.t_seconds},
                   {"loss", r.loss},
                   {"loss_std", r.loss_std},
                   {"seed", r.seed}});
  }
  return arr;
}

std::vector<ResultRecord> records_from_json(const json& j) {
  std::vector<ResultRecord> out;
  for (const auto& e : j) {
    ResultRecord r;
    r.experiment = e.at("experiment").get<std::string>();
    r.technology = e.at("technology").get<std::string>();
    r.slices = e.at("slices").get<std::size_t>();
    r.fault_ratio = e.at("fault_ratio").get<double>();
    r.retrained = e.at("retrained").get<bool>();
    r.t_seconds = e.at("t_seconds").get<double>();
    r.loss = e.at("loss").get<double>();
    r.loss_std = e.at("loss_std").get<double>();
    r.seed = e.at("seed").get<std::uint64_t>();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResultRecord> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw ParseError(1, "results header mismatch");
  }
  std::vector<ResultRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 9) throw ParseError(lineno, "expected 9 fields");
    try {
      ResultRecord r;
      r.experiment = f[0];
      r.technology = f[1];
      r.slices = std::stoul(f[2]);
      r.fault_ratio = parse_double(f[3]);
      if (f[4] != "true" && f[4] != "false") throw std::invalid_argument("retrained");
      r.retrained = f[4] == "true";
      r.t_seconds = parse_double(f[5]);
      r.loss = parse_double(f[6]);
      r.loss_std = parse_double(f[7]);
      r.seed = std::stoull(f[8]);
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(lineno, std::string("bad field: ") + e.what());
    }
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

void emit_results(std::span<const ResultRecord> records, const std::filesystem::path& out_dir) {
  if (records.empty()) throw std::invalid_argument("emit_results: no records");
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "results.csv", results_csv(records));
  write_text(out_dir / "results.json", results_json(records).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Context and cached networks

ExperimentContext::ExperimentContext(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const Dataset all =
      generate_dataset(cfg_.dataset.n_samples, cfg_.oracle, derive_seed(cfg_.seed, "dataset"));
  auto [tr, va] = split(all, cfg_.dataset.val_fraction, derive_seed(cfg_.seed, "split"));
  train_ = std::move(tr);
  val_ = std::move(va);
}

std::filesystem::path ExperimentContext::digital_checkpoint_path() const {
  return cfg_.out_dir / "digital.ckpt";
}

std::filesystem::path ExperimentContext::analog_checkpoint_path(Technology tech,
                                                                std::size_t slices) const {
  return cfg_.out_dir / ("analog_" + to_string(tech) + "_s" + std::to_string(slices) + ".ckpt");
}

std::string ExperimentContext::fingerprint(const std::string& role,
                                           const AnalogConfig* analog) const {
  json train = cfg_.train;
  json j = {{"role", role},
            {"network", cfg_.network},
            {"train", train},
            {"oracle", cfg_.oracle},
            {"dataset", {{"n_samples", cfg_.dataset.n_samples},
                         {"val_fraction", cfg_.dataset.val_fraction}}},
            {"seed", cfg_.seed}};
  if (analog) j["analog"] = *analog;
  return j.dump();
}

namespace {

std::optional<AnalogNetwork> try_load(const std::filesystem::path& path,
                                      const std::string& fingerprint) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    Checkpoint ck = load_checkpoint(path);
    if (ck.lineage.fingerprint == fingerprint) return std::move(ck.net);
  } catch (const std::exception& e) {
    std::cerr << "warning: ignoring checkpoint " << path << ": " << e.what() << '\n';
  }
  return std::nullopt;
}

AnalogNetwork initial_network(const ExperimentConfig& cfg, const AnalogConfig& analog) {
  Rng init(derive_seed(cfg.seed, "init"));
  return make_network(cfg.network, analog, init);
}

}  // namespace

AnalogNetwork ExperimentContext::digital_network(TrainHistory* history) {
  std::filesystem::create_directories(cfg_.out_dir);
  const AnalogConfig analog = cfg_.analog_config(Technology::PCM, cfg_.analog_slices);
  const std::string fp = fingerprint("digital", nullptr);
  const auto path = digital_checkpoint_path();
  if (!history) {
    if (auto net = try_load(path, fp)) return std::move(*net);
  }
  AnalogNetwork net = initial_network(cfg_, analog);
  TrainConfig tc = cfg_.train;
  tc.hwa = false;
  Rng rng(derive_seed(cfg_.seed, "digital_train"));
  TrainHistory h = train_hwa(net, train_, val_, tc, rng);
  save_checkpoint(net, {cfg_.seed, "digital_train", fp}, path);
  if (history) *history = std::move(h);
  return net;
}

AnalogNetwork ExperimentContext::analog_network(Technology tech, std::size_t slices,
                                                TrainHistory* history) {
  std::filesystem::create_directories(cfg_.out_dir);
  const AnalogConfig analog = cfg_.analog_config(tech, slices);
  const std::string fp = fingerprint("analog", &analog);
  const auto path = analog_checkpoint_path(tech, slices);
  if (!history) {
    if (auto net = try_load(path, fp)) return std::move(*net);
  }
  AnalogNetwork net = initial_network(cfg_, analog);
  TrainConfig tc = cfg_.train;
  tc.hwa = true;
  // Same stream for every slice count of a technology.
  Rng rng(derive_seed(cfg_.seed, "analog_train", {static_cast<std::uint64_t>(tech)}));
  TrainHistory h = train_hwa(net, train_, val_, tc, rng);
  save_checkpoint(net, {cfg_.seed, "analog_train/" + to_string(tech), fp}, path);
  if (history) *history = std::move(h);
  return net;
}

// ---------------------------------------------------------------------------
// Experiments

void run_gen_data(ExperimentContext& ctx) {
  const auto& out = ctx.config().out_dir;
  std::filesystem::create_directories(out);
  Dataset all = ctx.train_set();
  all.samples.insert(all.samples.end(), ctx.val_set().samples.begin(),
                     ctx.val_set().samples.end());
  save_dataset(all, out / "dataset.csv");
  save_dataset(ctx.train_set(), out / "train.csv");
  save_dataset(ctx.val_set(), out / "val.csv");
}

std::vector<ResultRecord> run_baseline(ExperimentContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  TrainHistory history;
  const AnalogNetwork net = ctx.digital_network(&history);
  history.write_csv(cfg.out_dir / "baseline_history.csv");
  ResultRecord r;
  r.experiment = "baseline";
  r.technology = "digital";
  r.loss = evaluate_digital(net, ctx.val_set());
  r.seed = cfg.seed;
  return {r};
}

namespace {

std::uint64_t key(double v) { return std::bit_cast<std::uint64_t>(v); }

ResultRecord record(const std::string& exp, Technology tech, std::size_t slices, double ratio,
                    bool retrained, double t, const Evaluation& ev, std::uint64_t seed) {
  return {exp, to_string(tech), slices, ratio, retrained, t, ev.mean, ev.std, seed};
}

}  // namespace

std::vector<ResultRecord> run_slice_sweep(ExperimentContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  std::vector<ResultRecord> out;
  for (Technology tech : cfg.technologies) {
    for (std::size_t slices : cfg.slices_list) {
      TrainHistory history;
      const AnalogNetwork net = ctx.analog_network(tech, slices, &history);
      history.write_csv(cfg.out_dir / ("slice_history_" + to_string(tech) + "_s" +
                                       std::to_string(slices) + ".csv"));
      Rng ev_rng(derive_seed(cfg.seed, "slice_sweep", {static_cast<std::uint64_t>(tech), slices}));
      const Evaluation ev = evaluate(net, ctx.val_set(), 0.0, cfg.eval_repeats, ev_rng);
      out.push_back(record("slice_sweep", tech, slices, 0.0, false, 0.0, ev, cfg.seed));
    }
  }
  return out;
}

std::vector<ResultRecord> run_fault_sweep(ExperimentContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  std::vector<ResultRecord> out;
  for (Technology tech : cfg.technologies) {
    const auto tid = static_cast<std::uint64_t>(tech);
    const AnalogNetwork trained = ctx.analog_network(tech, cfg.analog_slices);
    for (double ratio : cfg.fault_ratios) {
      AnalogNetwork net = trained;
      Rng mask_rng(derive_seed(cfg.seed, "fault_sweep/mask", {tid, key(ratio)}));
      const auto masks = sample_network_faults(net, ratio, mask_rng);
      apply_fault_masks(net, masks);
      Rng ev_rng(derive_seed(cfg.seed, "fault_sweep/eval", {tid, key(ratio)}));
      out.push_back(record("fault_sweep", tech, cfg.analog_slices, ratio, false, 0.0,
                           evaluate(net, ctx.val_set(), 0.0, cfg.eval_repeats, ev_rng),
                           cfg.seed));
      if (!cfg.retrain) continue;
      TrainConfig rc = cfg.train;
      rc.epochs = cfg.retrain_epochs.value_or(cfg.train.epochs);
      Rng rt_rng(derive_seed(cfg.seed, "fault_sweep/retrain", {tid, key(ratio)}));
      retrain_after_faults(net, masks, ctx.train_set(), ctx.val_set(), rc, rt_rng);
      Rng ev2_rng(derive_seed(cfg.seed, "fault_sweep/eval_retrained", {tid, key(ratio)}));
      out.push_back(record("fault_sweep", tech, cfg.analog_slices, ratio, true, 0.0,
                           evaluate(net, ctx.val_set(), 0.0, cfg.eval_repeats, ev2_rng),
                           cfg.seed));
    }
  }
  return out;
}

std::vector<ResultRecord> run_drift_eval(ExperimentContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  std::vector<ResultRecord> out;
  for (Technology tech : cfg.technologies) {
    const AnalogNetwork net = ctx.analog_network(tech, cfg.analog_slices);
    for (double t : cfg.drift_times_s) {
      // Every time point replays the same noise stream, so differences
      // between rows come from drift alone.
      Rng ev_rng(derive_seed(cfg.seed, "drift_eval", {static_cast<std::uint64_t>(tech)}));
      out.push_back(record("drift_eval", tech, cfg.analog_slices, 0.0, false, t,
                           evaluate(net, ctx.val_set(), t, cfg.eval_repeats, ev_rng), cfg.seed));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transfer profile

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

std::vector<double> lowpass_filter(std::span<const double> series, double alpha) {
  if (series.empty()) throw std::invalid_argument("lowpass_filter: empty series");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("lowpass_filter: alpha not in (0, 1]");
  std::vector<double> y(series.size());
  y[0] = series[0];
  for (std::size_t k = 1; k < series.size(); ++k) y[k] = alpha * series[k] + (1.0 - alpha) * y[k - 1];
  return y;
}

std::vector<std::array<double, 2>> lowpass_filter(std::span<const std::array<double, 2>> series,
                                                  double alpha) {
  if (series.empty()) throw std::invalid_argument("lowpass_filter: empty series");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("lowpass_filter: alpha not in (0, 1]");
  std::vector<std::array<double, 2>> out(series.size());
  std::array<double, 2> state = series[0];
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (k > 0) {
      for (int i = 0; i < 2; ++i) state[i] = alpha * series[k][i] + (1.0 - alpha) * state[i];
    }
    const double n = std::hypot(state[0], state[1]);
    out[k] = n > 0.0 ? std::array<double, 2>{state[0] / n, state[1] / n} : state;
  }
  return out;
}

std::string TransferProfile::to_csv() const {
  std::ostringstream out;
  out << "step,time,y,vy,z,vz,theta,oracle_angle,digital_angle,analog_angle,analog_filtered_angle\n";
  for (const auto& s : steps) {
    out << s.step << ',' << format_double(s.time);
    for (double v : s.state) out << ',' << format_double(v);
    out << ',' << format_double(s.oracle_angle) << ',' << format_double(s.digital_angle) << ','
        << format_double(s.analog_angle) << ',' << format_double(s.analog_filtered_angle) << '\n';
  }
  return out.str();
}

namespace {

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_abs(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

using State4 = std::array<double, 4>;  // y, vy, z, vz

State4 derivative(const State4& s, double t_go) {
  const auto a = optimal_acceleration({s[0], s[1], s[2], s[3], 0.0}, t_go);
  return {s[1], a[0], s[3], a[1]};
}

State4 rk4_step(const State4& s, double dt, double t_go) {
  auto axpy = [](const State4& x, double h, const State4& d) {
    return State4{x[0] + h * d[0], x[1] + h * d[1], x[2] + h * d[2], x[3] + h * d[3]};
  };
  const State4 k1 = derivative(s, t_go);
  const State4 k2 = derivative(axpy(s, dt / 2, k1), t_go);
  const State4 k3 = derivative(axpy(s, dt / 2, k2), t_go);
  const State4 k4 = derivative(axpy(s, dt, k3), t_go);
  State4 out;
  for (int i = 0; i < 4; ++i) out[i] = s[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

double vec_angle(const std::vector<double>& u) { return control_to_angle({u[0], u[1]}); }

}  // namespace

TransferProfile transfer_profile(const AnalogNetwork& digital, const AnalogNetwork& analog,
                                 const ExperimentConfig& cfg, std::uint64_t seed) {
  const OracleParams& op = cfg.oracle;
  const double t_go = cfg.transfer.t_go;
  const double dt = t_go / static_cast<double>(cfg.transfer.steps);

  Rng rng(seed);
  std::uniform_real_distribution<double> pos(-op.position_range, op.position_range);
  std::uniform_real_distribution<double> vel(-op.velocity_range, op.velocity_range);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  State4 s;
  double theta = 0.0;
  do {
    s = {pos(rng), vel(rng), pos(rng), vel(rng)};
    theta = ang(rng);
  } while (std::hypot(optimal_acceleration({s[0], s[1], s[2], s[3], 0.0}, t_go)[0],
                      optimal_acceleration({s[0], s[1], s[2], s[3], 0.0}, t_go)[1]) <
           10.0 * op.min_accel);

  const NetworkReadout readout = make_readout(analog, 0.0);
  const std::uint64_t noise_seed = rng();
  TransferProfile prof;
  std::vector<std::array<double, 2>> analog_dirs;
  for (std::size_t k = 0; k < cfg.transfer.steps; ++k) {
    const std::array<double, 5> state{s[0], s[1], s[2], s[3], theta};
    const auto a = optimal_acceleration(state, t_go);
    if (std::hypot(a[0], a[1]) < op.min_accel) {
      std::cerr << "warning: transfer profile reached a degenerate state at step " << k
                << "; truncating\n";
      prof.truncated = true;
      break;
    }
    TransferStep st;
    st.step = k;
    st.time = static_cast<double>(k) * dt;
    st.state = state;
    st.oracle_angle = std::atan2(a[1], a[0]);
    st.digital_angle = vec_angle(forward_digital(digital, state));
    Rng step_rng(derive_seed(noise_seed, k));
    const auto ya = forward_analog(analog, readout, state, step_rng);
    st.analog_angle = vec_angle(ya);
    analog_dirs.push_back({ya[0], ya[1]});
    prof.steps.push_back(st);
    s = rk4_step(s, dt, t_go);
  }
  if (prof.steps.empty()) return prof;

  const auto filtered = lowpass_filter(analog_dirs, cfg.transfer.alpha);
  std::vector<double> ed, ea, ef;
  for (std::size_t k = 0; k < prof.steps.size(); ++k) {
    TransferStep& st = prof.steps[k];
    st.analog_filtered_angle = control_to_angle(filtered[k]);
    ed.push_back(wrap_angle(st.digital_angle - st.oracle_angle));
    ea.push_back(wrap_angle(st.analog_angle - st.oracle_angle));
    ef.push_back(wrap_angle(st.analog_filtered_angle - st.oracle_angle));
  }
  prof.digital_error_std = sample_std(ed);
  prof.analog_error_std = sample_std(ea);
  prof.filtered_error_std = sample_std(ef);
  prof.digital_error_mean_abs = mean_abs(ed);
  prof.analog_error_mean_abs = mean_abs(ea);
  return prof;
}

TransferProfile run_transfer_profile(ExperimentContext& ctx) {
  const ExperimentConfig& cfg = ctx.config();
  const AnalogNetwork digital = ctx.digital_network();
  const AnalogNetwork analog = ctx.analog_network(cfg.technologies.front(), cfg.transfer.slices);
  TransferProfile prof = transfer_profile(digital, analog, cfg, derive_seed(cfg.seed, "transfer"));
  write_text(cfg.out_dir / "transfer.csv", prof.to_csv());
  const json summary = {{"technology", to_string(cfg.technologies.front())},
                        {"slices", cfg.transfer.slices},
                        {"steps", prof.steps.size()},
                        {"truncated", prof.truncated},
                        {"alpha", cfg.transfer.alpha},
                        {"digital_error_std", prof.digital_error_std},
                        {"analog_error_std", prof.analog_error_std},
                        {"analog_filtered_error_std", prof.filtered_error_std},
                        {"digital_error_mean_abs", prof.digital_error_mean_abs},
                        {"analog_error_mean_abs", prof.analog_error_mean_abs}};
  write_text(cfg.out_dir / "transfer_summary.json", summary.dump(2) + "\n");
  return prof;
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg) {
  ExperimentContext ctx(cfg);
  std::vector<ResultRecord> records;
  switch (cfg.experiment) {
    case ExperimentKind::Baseline:
      records = run_baseline(ctx);
      break;
    case ExperimentKind::SliceSweep:
      records = run_slice_sweep(ctx);
      break;
    case ExperimentKind::FaultSweep:
      records = run_fault_sweep(ctx);
      break;
    case ExperimentKind::DriftEval:
      records = run_drift_eval(ctx);
      break;
    case ExperimentKind::TransferProfile:
      run_transfer_profile(ctx);
      return {};
  }
  emit_results(records, cfg.out_dir);
  write_text(cfg.out_dir / (to_string(cfg.experiment) + "_results.csv"), results_csv(records));
  return records;
}

}  // namespace memsim
