#include "meshroute/pipeline.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "meshroute/error.hpp"
#include "meshroute/rng.hpp"
#include "meshroute/simulator.hpp"
#include "meshroute/text_io.hpp"

namespace meshroute {

ScenarioConfig PipelineConfig::default_scenario_template() {
  ScenarioConfig c;
  c.area_width = 225.0;
  c.area_height = 225.0;
  c.buffer_capacity_min = 3;
  c.buffer_capacity_max = 10;
  return c;
}

SimulationConfig PipelineConfig::default_simulation() {
  SimulationConfig c;
  c.message_interval_s = 0.1;
  return c;
}

std::vector<ScenarioConfig> PipelineConfig::scenario_configs() const {
  std::vector<ScenarioConfig> out;
  for (int i = 1; i <= scenario_count; ++i) {
    ScenarioConfig c = scenario_template;
    c.seed = derive_seed(scenario_seed, static_cast<std::uint64_t>(i));
    const double step = scenario_count > 1 ? static_cast<double>(node_count_max - node_count_min) / (scenario_count - 1) : 0.0;
    c.node_count = node_count_min + static_cast<int>(std::lround(step * (i - 1)));
    out.push_back(c);
  }
  return out;
}

void PipelineConfig::validate() const {
  if (scenario_count < 1) throw ConfigError("scenario_count must be >= 1");
  if (node_count_min < 2 || node_count_max < node_count_min) {
    throw ConfigError("node counts must satisfy 2 <= node_count_min <= node_count_max");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0,1)");
  if (!(bootstrap_level > 0.0 && bootstrap_level < 1.0)) throw ConfigError("bootstrap_level must be in (0,1)");
  if (bootstrap_resamples < 1) throw ConfigError("bootstrap_resamples must be >= 1");
  for (const auto& c : scenario_configs()) c.validate();
  simulation.validate();
}

namespace {

std::vector<double> number_list(const std::string& v, const std::string& key, std::size_t expected) {
  std::vector<double> out;
  for (const auto& part : text::split(v, ',')) out.push_back(text::parse_double(text::trim(part), key));
  if (out.size() != expected) {
    throw ConfigError(key + " needs " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

void set_weights(FusionWeights& w, const std::vector<double>& v) {
  w.w_d = v[0];
  w.w_a = v[1];
  w.w_b = v[2];
  w.w_c = v[3];
}

}  // namespace

PipelineConfig parse_config(const std::vector<std::string>& lines) {
  PipelineConfig c;
  auto& sc = c.scenario_template;
  auto& sim = c.simulation;
  auto as_int = [](const std::string& v, const std::string& k) { return static_cast<int>(text::parse_int(v, k)); };
  auto as_u64 = [](const std::string& v, const std::string& k) {
    const auto n = text::parse_int(v, k);
    if (n < 0) throw ConfigError(k + " must be non-negative");
    return static_cast<std::uint64_t>(n);
  };
  auto real = [](const std::string& v, const std::string& k) { return text::parse_double(v, k); };

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"scenario_count", [&](auto& v, auto& k) { c.scenario_count = as_int(v, k); }},
      {"scenario_seed", [&](auto& v, auto& k) { c.scenario_seed = as_u64(v, k); }},
      {"node_count_min", [&](auto& v, auto& k) { c.node_count_min = as_int(v, k); }},
      {"node_count_max", [&](auto& v, auto& k) { c.node_count_max = as_int(v, k); }},
      {"area_width_m", [&](auto& v, auto& k) { sc.area_width = real(v, k); }},
      {"area_height_m", [&](auto& v, auto& k) { sc.area_height = real(v, k); }},
      {"mix_phone", [&](auto& v, auto& k) { sc.device_type_mix.phone = real(v, k); }},
      {"mix_sensor", [&](auto& v, auto& k) { sc.device_type_mix.sensor = real(v, k); }},
      {"mix_relay", [&](auto& v, auto& k) { sc.device_type_mix.relay = real(v, k); }},
      {"buffer_capacity_min", [&](auto& v, auto& k) { sc.buffer_capacity_min = as_int(v, k); }},
      {"buffer_capacity_max", [&](auto& v, auto& k) { sc.buffer_capacity_max = as_int(v, k); }},
      {"radius_m", [&](auto& v, auto& k) { sim.radius_m = real(v, k); }},
      {"ttl_initial", [&](auto& v, auto& k) { sim.ttl_initial = as_int(v, k); }},
      {"messages_per_scenario", [&](auto& v, auto& k) { sim.messages_per_scenario = as_int(v, k); }},
      {"message_interval_s", [&](auto& v, auto& k) { sim.message_interval_s = real(v, k); }},
      {"base_hop_delay_s", [&](auto& v, auto& k) { sim.base_hop_delay_s = real(v, k); }},
      {"queue_penalty_s", [&](auto& v, auto& k) { sim.queue_penalty_s = real(v, k); }},
      {"capability_weights",
       [&](auto& v, auto& k) {
         const auto w = number_list(v, k, 3);
         sim.capability_weights = {w[0], w[1], w[2]};
       }},
      {"workload_seed", [&](auto& v, auto& k) { sim.workload_seed = as_u64(v, k); }},
      {"prior_pseudo_attempts", [&](auto& v, auto& k) { sim.prior_pseudo_attempts = real(v, k); }},
      {"uptime_prior_weight", [&](auto& v, auto& k) { sim.uptime_prior_weight = real(v, k); }},
      {"fusion_k", [&](auto& v, auto& k) { sim.fusion.k = as_int(v, k); }},
      {"fusion_threshold", [&](auto& v, auto& k) { sim.fusion.threshold = real(v, k); }},
      {"abc_weights", [&](auto& v, auto& k) { set_weights(sim.fusion.abc_weights, number_list(v, k, 4)); }},
      {"abcd_weights", [&](auto& v, auto& k) { set_weights(sim.fusion.abcd_weights, number_list(v, k, 4)); }},
      {"delay_divisor",
       [&](auto& v, auto& k) {
         sim.fusion.abc_weights.delay_divisor = real(v, k);
         sim.fusion.abcd_weights.delay_divisor = real(v, k);
       }},
      {"train_seed", [&](auto& v, auto& k) { c.train_seed = as_u64(v, k); }},
      {"train_fraction", [&](auto& v, auto& k) { c.train_fraction = real(v, k); }},
      {"bootstrap_level", [&](auto& v, auto& k) { c.bootstrap_level = real(v, k); }},
      {"bootstrap_resamples", [&](auto& v, auto& k) { c.bootstrap_resamples = as_int(v, k); }},
      {"bootstrap_seed", [&](auto& v, auto& k) { c.bootstrap_seed = as_u64(v, k); }},
  };

  int line_no = 0;
  for (const auto& raw : lines) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->second(value, key);
    } catch (const ValidationError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(text::read_lines(path));
}

std::string format_config(const PipelineConfig& c) {
  const auto& sc = c.scenario_template;
  const auto& sim = c.simulation;
  auto w = [](const FusionWeights& f) {
    return text::exact(f.w_d) + "," + text::exact(f.w_a) + "," + text::exact(f.w_b) + "," + text::exact(f.w_c);
  };
  std::ostringstream out;
  out << "scenario_count = " << c.scenario_count << '\n'
      << "scenario_seed = " << c.scenario_seed << '\n'
      << "node_count_min = " << c.node_count_min << '\n'
      << "node_count_max = " << c.node_count_max << '\n'
      << "area_width_m = " << text::exact(sc.area_width) << '\n'
      << "area_height_m = " << text::exact(sc.area_height) << '\n'
      << "mix_phone = " << text::exact(sc.device_type_mix.phone) << '\n'
      << "mix_sensor = " << text::exact(sc.device_type_mix.sensor) << '\n'
      << "mix_relay = " << text::exact(sc.device_type_mix.relay) << '\n'
      << "buffer_capacity_min = " << sc.buffer_capacity_min << '\n'
      << "buffer_capacity_max = " << sc.buffer_capacity_max << '\n'
      << "radius_m = " << text::exact(sim.radius_m) << '\n'
      << "ttl_initial = " << sim.ttl_initial << '\n'
      << "messages_per_scenario = " << sim.messages_per_scenario << '\n'
      << "message_interval_s = " << text::exact(sim.message_interval_s) << '\n'
      << "base_hop_delay_s = " << text::exact(sim.base_hop_delay_s) << '\n'
      << "queue_penalty_s = " << text::exact(sim.queue_penalty_s) << '\n'
      << "capability_weights = " << text::exact(sim.capability_weights[0]) << ','
      << text::exact(sim.capability_weights[1]) << ',' << text::exact(sim.capability_weights[2]) << '\n'
      << "workload_seed = " << sim.workload_seed << '\n'
      << "prior_pseudo_attempts = " << text::exact(sim.prior_pseudo_attempts) << '\n'
      << "uptime_prior_weight = " << text::exact(sim.uptime_prior_weight) << '\n'
      << "fusion_k = " << sim.fusion.k << '\n'
      << "fusion_threshold = " << text::exact(sim.fusion.threshold) << '\n'
      << "abc_weights = " << w(sim.fusion.abc_weights) << '\n'
      << "abcd_weights = " << w(sim.fusion.abcd_weights) << '\n'
      << "delay_divisor = " << text::exact(sim.fusion.abcd_weights.delay_divisor) << '\n'
      << "train_seed = " << c.train_seed << '\n'
      << "train_fraction = " << text::exact(c.train_fraction) << '\n'
      << "bootstrap_level = " << text::exact(c.bootstrap_level) << '\n'
      << "bootstrap_resamples = " << c.bootstrap_resamples << '\n'
      << "bootstrap_seed = " << c.bootstrap_seed << '\n';
  return out.str();
}

std::vector<std::filesystem::path> cmd_gen(const PipelineConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  int id = 1;
  for (const auto& sc : config.scenario_configs()) {
    const auto path = out_dir / scenario_file_name(id);
    save_scenario(generate_scenario(sc, id), path);
    written.push_back(path);
    ++id;
  }
  return written;
}

RunReport cmd_run(const PipelineConfig& config, const std::filesystem::path& scenario_dir, Mode mode,
                  const std::optional<std::filesystem::path>& bundle_dir, const std::filesystem::path& out_log) {
  std::optional<ModelBundle> bundle;
  if (mode != Mode::baseline) {
    if (!bundle_dir) {
      throw MissingDependencyError("mode " + std::string(to_string(mode)) + " needs --bundle");
    }
    bundle = load_bundle(*bundle_dir);
  }
  if (!std::filesystem::is_directory(scenario_dir)) {
    throw MissingDependencyError("scenario directory not found: " + scenario_dir.string());
  }
  const auto scenarios = load_scenario_dir(scenario_dir);
  if (scenarios.empty()) throw MissingDependencyError("no scenario files in " + scenario_dir.string());

  RunReport report;
  std::vector<HopLogRecord> all;
  for (const auto& s : scenarios) {
    auto run = run_scenario(s, config.simulation, mode, bundle ? &*bundle : nullptr);
    report.messages += run.outcomes.size();
    all.insert(all.end(), std::make_move_iterator(run.records.begin()), std::make_move_iterator(run.records.end()));
  }
  report.records = all.size();
  if (!all.empty()) report.summary = aggregate(all);
  if (out_log.has_parent_path()) std::filesystem::create_directories(out_log.parent_path());
  save_hop_log(all, out_log.string());
  return report;
}

namespace {
std::vector<HopLogRecord> read_log(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw MissingDependencyError("log file not found: " + p.string());
  return load_hop_log(p.string());
}
}  // namespace

void cmd_extract(const std::filesystem::path& log, const std::filesystem::path& out_dir) {
  const auto logs = read_log(log);
  std::filesystem::create_directories(out_dir);
  text::write_atomic(out_dir / "dataset_a.csv", dataset_csv(extract_dataset_a(logs)));
  text::write_atomic(out_dir / "dataset_b.csv", dataset_csv(extract_dataset_b(logs)));
  text::write_atomic(out_dir / "dataset_c.csv", dataset_csv(extract_dataset_c(logs)));
  text::write_atomic(out_dir / "dataset_d.csv", dataset_csv(extract_dataset_d(logs)));
}

ModelBundle cmd_train(const PipelineConfig& config, const std::filesystem::path& log, std::uint64_t seed,
                      const std::filesystem::path& out_bundle) {
  const auto logs = read_log(log);
  auto specs = BundleSpecs::defaults();
  specs.train_fraction = config.train_fraction;
  auto bundle = train_bundle(logs, seed, specs);
  save_bundle(bundle, out_bundle);
  return bundle;
}

CompareReport cmd_compare(const PipelineConfig& config, const std::vector<std::filesystem::path>& logs,
                          const std::filesystem::path& out_dir) {
  std::map<Mode, std::vector<HopLogRecord>> by_mode;
  for (const auto& p : logs) {
    for (auto& r : read_log(p)) by_mode[r.mode].push_back(std::move(r));
  }
  for (Mode m : {Mode::baseline, Mode::abc, Mode::abcd}) {
    if (!by_mode.contains(m)) throw MissingDependencyError("no log for mode " + std::string(to_string(m)));
  }

  CompareReport rep;
  rep.matrix = per_scenario_table(by_mode);
  for (Mode m : rep.matrix.modes) rep.summaries.push_back(aggregate(by_mode.at(m)));

  std::vector<double> diffs;
  const auto col = [&](Mode m) {
    return static_cast<std::size_t>(std::find(rep.matrix.modes.begin(), rep.matrix.modes.end(), m) -
                                    rep.matrix.modes.begin());
  };
  for (const auto& row : rep.matrix.pdr) diffs.push_back(row[col(Mode::abcd)] - row[col(Mode::baseline)]);
  double sum = 0.0;
  for (double d : diffs) sum += d;
  rep.mean_diff = diffs.empty() ? 0.0 : sum / static_cast<double>(diffs.size());

  std::ostringstream stats;
  stats << "paired per-scenario PDR difference (abcd - baseline)\n";
  stats << "scenarios: " << diffs.size() << '\n';
  stats << "mean_diff_pp: " << text::fixed(rep.mean_diff, 4) << '\n';
  try {
    rep.wilcoxon = wilcoxon_signed_rank(diffs);
    stats << "wilcoxon_method: " << (rep.wilcoxon.exact ? "exact" : "normal-approx") << '\n';
    stats << "wilcoxon_n: " << rep.wilcoxon.n << '\n';
    stats << "wilcoxon_w_plus: " << text::fixed(rep.wilcoxon.w_plus, 1) << '\n';
    stats << "wilcoxon_p_two_sided: " << text::fixed(rep.wilcoxon.p_value, 6) << '\n';
  } catch (const DataError& e) {
    rep.wilcoxon.p_value = std::nan("");
    stats << "wilcoxon: not computed (" << e.what() << ")\n";
  }
  if (diffs.size() >= 2) {
    rep.ci = bootstrap_ci(diffs, config.bootstrap_level, config.bootstrap_resamples, config.bootstrap_seed);
    stats << "bootstrap_level: " << text::fixed(config.bootstrap_level, 2) << '\n';
    stats << "bootstrap_resamples: " << config.bootstrap_resamples << '\n';
    stats << "ci_low_pp: " << text::fixed(rep.ci.first, 4) << '\n';
    stats << "ci_high_pp: " << text::fixed(rep.ci.second, 4) << '\n';
  }

  std::filesystem::create_directories(out_dir);
  const auto summary = format_summary_table(rep.summaries);
  const auto matrix = format_scenario_matrix(rep.matrix);
  text::write_atomic(out_dir / "summary.csv", summary);
  text::write_atomic(out_dir / "per_scenario_pdr.csv", matrix);
  text::write_atomic(out_dir / "stats.txt", stats.str());
  rep.text = summary + "\n" + matrix + "\n" + stats.str();
  return rep;
}

}  // namespace meshroute
