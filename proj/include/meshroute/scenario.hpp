#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace meshroute {

/// Enumerator values are the ordinal encoding used as a model feature
/// (alphabetical: phone, relay, sensor).
enum class DeviceType : int { phone = 0, relay = 1, sensor = 2 };

std::string_view to_string(DeviceType t);
DeviceType parse_device_type(std::string_view s);

struct DeviceSpec {
  int device_id = 0;
  double x_position = 0.0;
  double y_position = 0.0;
  double battery_level = 0.0;
  double signal_quality = 0.0;
  double success_rate = 0.0;
  DeviceType device_type = DeviceType::phone;
  double priority_tolerance = 0.0;
  int buffer_capacity = 1;
  double uptime_ratio = 0.0;

  bool operator==(const DeviceSpec&) const = default;
};

struct DeviceTypeMix {
  double phone = 0.5;
  double sensor = 0.3;
  double relay = 0.2;

  bool operator==(const DeviceTypeMix&) const = default;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int node_count = 80;
  double area_width = 400.0;
  double area_height = 400.0;
  DeviceTypeMix device_type_mix{};
  int buffer_capacity_min = 10;
  int buffer_capacity_max = 40;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

struct Scenario {
  int scenario_id = 0;
  std::vector<DeviceSpec> devices;  // sorted by device_id
  ScenarioConfig config;

  const DeviceSpec& device(int device_id) const;

  bool operator==(const Scenario&) const = default;
};

/// Throws ValidationError if any DeviceSpec invariant or the scenario-level
/// invariants (sorted unique ids, non-empty) are violated.
void validate_scenario(const Scenario& s);

/// Draw order per device follows the file column order: x, y, battery,
/// signal, success_rate, type, priority_tolerance, buffer_capacity, uptime.
/// Fractional values are quantised to the 6 decimals the file format keeps,
/// so save/load reproduces a generated scenario exactly.
Scenario generate_scenario(const ScenarioConfig& config, int scenario_id = 1);

inline constexpr std::string_view kScenarioHeader =
    "device_id,x_position,y_position,battery_level,signal_quality,success_rate,"
    "device_type,priority_tolerance,buffer_capacity,uptime_ratio";

std::string format_scenario(const Scenario& s);
Scenario parse_scenario(const std::vector<std::string>& lines, int scenario_id = 0);

/// The scenario id is taken from a `devices_scenario_{i}.csv` file name when
/// present, otherwise 0. The returned config is reconstructed from the rows.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

std::string scenario_file_name(int scenario_id);

/// Loads every `devices_scenario_{i}.csv` under `dir`, ordered by id.
std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir);

}  // namespace meshroute
