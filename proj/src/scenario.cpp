#include "meshroute/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "meshroute/error.hpp"
#include "meshroute/rng.hpp"
#include "meshroute/text_io.hpp"

namespace meshroute {

namespace {

constexpr std::array<std::string_view, 10> kColumns = {
    "device_id",      "x_position",  "y_position",         "battery_level",   "signal_quality",
    "success_rate",   "device_type", "priority_tolerance", "buffer_capacity", "uptime_ratio"};

double quantise6(double v) { return text::parse_double(text::fixed(v, 6), "quantise"); }

bool is_fraction(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view to_string(DeviceType t) {
  switch (t) {
    case DeviceType::phone:
      return "phone";
    case DeviceType::relay:
      return "relay";
    case DeviceType::sensor:
      return "sensor";
  }
  return "phone";
}

DeviceType parse_device_type(std::string_view s) {
  if (s == "phone") return DeviceType::phone;
  if (s == "relay") return DeviceType::relay;
  if (s == "sensor") return DeviceType::sensor;
  throw ValidationError("unknown device type '" + std::string(s) + "'");
}

void ScenarioConfig::validate() const {
  if (node_count < 2) throw ConfigError("node_count must be >= 2, got " + std::to_string(node_count));
  if (!(area_width > 0.0) || !(area_height > 0.0)) throw ConfigError("area dimensions must be > 0");
  const auto& m = device_type_mix;
  if (m.phone < 0 || m.sensor < 0 || m.relay < 0) throw ConfigError("device type mix fractions must be >= 0");
  if (std::abs(m.phone + m.sensor + m.relay - 1.0) > 1e-9) {
    throw ConfigError("device type mix must sum to 1");
  }
  if (buffer_capacity_min < 1 || buffer_capacity_max < buffer_capacity_min) {
    throw ConfigError("buffer capacity range must satisfy 1 <= min <= max");
  }
}

const DeviceSpec& Scenario::device(int device_id) const {
  auto it = std::lower_bound(devices.begin(), devices.end(), device_id,
                             [](const DeviceSpec& d, int id) { return d.device_id < id; });
  if (it == devices.end() || it->device_id != device_id) {
    throw ValidationError("unknown device id " + std::to_string(device_id));
  }
  return *it;
}

void validate_scenario(const Scenario& s) {
  if (s.devices.empty()) throw ValidationError("scenario has no devices");
  for (std::size_t i = 0; i < s.devices.size(); ++i) {
    const auto& d = s.devices[i];
    const std::string where = "device " + std::to_string(d.device_id);
    if (d.device_id < 1) throw ValidationError(where + ": device_id must be >= 1");
    if (i > 0 && s.devices[i - 1].device_id >= d.device_id) {
      throw ValidationError(where + ": device ids must be unique and ascending");
    }
    for (double f : {d.battery_level, d.signal_quality, d.success_rate, d.priority_tolerance, d.uptime_ratio}) {
      if (!is_fraction(f)) throw ValidationError(where + ": fraction field outside [0,1]");
    }
    if (d.buffer_capacity < 1) throw ValidationError(where + ": buffer_capacity must be >= 1");
    if (!std::isfinite(d.x_position) || !std::isfinite(d.y_position)) {
      throw ValidationError(where + ": non-finite position");
    }
  }
}

Scenario generate_scenario(const ScenarioConfig& config, int scenario_id) {
  config.validate();
  Rng rng(config.seed);
  Scenario s;
  s.scenario_id = scenario_id;
  s.config = config;
  s.devices.reserve(static_cast<std::size_t>(config.node_count));
  const auto& mix = config.device_type_mix;
  for (int id = 1; id <= config.node_count; ++id) {
    DeviceSpec d;
    d.device_id = id;
    d.x_position = quantise6(rng.uniform(0.0, config.area_width));
    d.y_position = quantise6(rng.uniform(0.0, config.area_height));
    d.battery_level = quantise6(rng.uniform01());
    d.signal_quality = quantise6(rng.uniform01());
    d.success_rate = quantise6(rng.uniform01());
    const double u = rng.uniform01();
    d.device_type = u < mix.phone ? DeviceType::phone
                    : u < mix.phone + mix.sensor ? DeviceType::sensor
                                                 : DeviceType::relay;
    d.priority_tolerance = quantise6(rng.uniform01());
    d.buffer_capacity = static_cast<int>(rng.uniform_int(config.buffer_capacity_min, config.buffer_capacity_max));
    d.uptime_ratio = quantise6(rng.uniform01());
    s.devices.push_back(d);
  }
  return s;
}

std::string format_scenario(const Scenario& s) {
  validate_scenario(s);
  std::ostringstream out;
  out << kScenarioHeader << '\n';
  for (const auto& d : s.devices) {
    out << d.device_id << ',' << text::fixed(d.x_position, 6) << ',' << text::fixed(d.y_position, 6) << ','
        << text::fixed(d.battery_level, 6) << ',' << text::fixed(d.signal_quality, 6) << ','
        << text::fixed(d.success_rate, 6) << ',' << to_string(d.device_type) << ','
        << text::fixed(d.priority_tolerance, 6) << ',' << d.buffer_capacity << ','
        << text::fixed(d.uptime_ratio, 6) << '\n';
  }
  return out.str();
}

Scenario parse_scenario(const std::vector<std::string>& lines, int scenario_id) {
  if (lines.empty()) throw SchemaError("scenario file is empty (no header row)");
  const auto header = text::split(lines.front(), ',');
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (c >= header.size() || text::trim(header[c]) != kColumns[c]) {
      throw SchemaError("scenario header: missing column '" + std::string(kColumns[c]) + "' at position " +
                        std::to_string(c + 1));
    }
  }
  if (header.size() != kColumns.size()) throw SchemaError("scenario header has unexpected extra columns");

  Scenario s;
  s.scenario_id = scenario_id;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (text::trim(lines[r]).empty()) continue;
    const std::string row = "row " + std::to_string(r);
    const auto f = text::split(lines[r], ',');
    if (f.size() != kColumns.size()) throw SchemaError(row + ": expected 10 fields");
    DeviceSpec d;
    d.device_id = static_cast<int>(text::parse_int(f[0], row + " device_id"));
    d.x_position = text::parse_double(f[1], row + " x_position");
    d.y_position = text::parse_double(f[2], row + " y_position");
    d.battery_level = text::parse_double(f[3], row + " battery_level");
    d.signal_quality = text::parse_double(f[4], row + " signal_quality");
    d.success_rate = text::parse_double(f[5], row + " success_rate");
    try {
      d.device_type = parse_device_type(text::trim(f[6]));
    } catch (const ValidationError& e) {
      throw ValidationError(row + ": " + e.what());
    }
    d.priority_tolerance = text::parse_double(f[7], row + " priority_tolerance");
    d.buffer_capacity = static_cast<int>(text::parse_int(f[8], row + " buffer_capacity"));
    d.uptime_ratio = text::parse_double(f[9], row + " uptime_ratio");

    const std::array<std::pair<std::string_view, double>, 5> fractions = {{{"battery_level", d.battery_level},
                                                                           {"signal_quality", d.signal_quality},
                                                                           {"success_rate", d.success_rate},
                                                                           {"priority_tolerance", d.priority_tolerance},
                                                                           {"uptime_ratio", d.uptime_ratio}}};
    for (const auto& [name, v] : fractions) {
      if (!is_fraction(v)) throw ValidationError(row + ": " + std::string(name) + " outside [0,1]");
    }
    if (d.buffer_capacity < 1) throw ValidationError(row + ": buffer_capacity must be >= 1");
    if (d.device_id < 1) throw ValidationError(row + ": device_id must be >= 1");
    s.devices.push_back(d);
  }
  if (s.devices.empty()) throw ValidationError("scenario file has a header but no devices");

  std::sort(s.devices.begin(), s.devices.end(),
            [](const DeviceSpec& a, const DeviceSpec& b) { return a.device_id < b.device_id; });
  for (std::size_t i = 1; i < s.devices.size(); ++i) {
    if (s.devices[i].device_id == s.devices[i - 1].device_id) {
      throw ValidationError("duplicate device_id " + std::to_string(s.devices[i].device_id));
    }
  }

  // Reconstruct a config describing what was read.
  auto& c = s.config;
  c.seed = 0;
  c.node_count = static_cast<int>(s.devices.size());
  double max_x = 0.0, max_y = 0.0;
  int phones = 0, sensors = 0, relays = 0;
  c.buffer_capacity_min = s.devices.front().buffer_capacity;
  c.buffer_capacity_max = s.devices.front().buffer_capacity;
  for (const auto& d : s.devices) {
    max_x = std::max(max_x, d.x_position);
    max_y = std::max(max_y, d.y_position);
    phones += d.device_type == DeviceType::phone;
    sensors += d.device_type == DeviceType::sensor;
    relays += d.device_type == DeviceType::relay;
    c.buffer_capacity_min = std::min(c.buffer_capacity_min, d.buffer_capacity);
    c.buffer_capacity_max = std::max(c.buffer_capacity_max, d.buffer_capacity);
  }
  c.area_width = std::max(1.0, std::ceil(max_x));
  c.area_height = std::max(1.0, std::ceil(max_y));
  const double n = static_cast<double>(s.devices.size());
  c.device_type_mix = {phones / n, sensors / n, relays / n};
  return s;
}

std::string scenario_file_name(int scenario_id) {
  return "devices_scenario_" + std::to_string(scenario_id) + ".csv";
}

namespace {
int id_from_file_name(const std::filesystem::path& path) {
  static const std::regex pattern(R"(devices_scenario_(\d+)\.csv)");
  std::smatch m;
  const std::string name = path.filename().string();
  if (std::regex_match(name, m, pattern)) return std::stoi(m[1].str());
  return 0;
}
}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(text::read_lines(path), id_from_file_name(path));
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  text::write_atomic(path, format_scenario(s));
}

std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && id_from_file_name(entry.path()) > 0) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return id_from_file_name(a) < id_from_file_name(b); });
  std::vector<Scenario> out;
  for (const auto& f : files) out.push_back(load_scenario(f));
  if (out.empty()) throw IoError("no devices_scenario_*.csv files in " + dir.string());
  return out;
}

}  // namespace meshroute
