#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qensemble/units.hpp"

namespace qens {

enum class Scenario { ensemble, well, spread, collapse, eraser, bomb };
enum class OutputFormat { csv, json };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view text);
std::string_view to_string(OutputFormat f);
OutputFormat parse_output_format(std::string_view text);

inline constexpr int kSchemaVersion = 1;

/// One accepted parameter of a scenario.
struct KeySpec {
  std::string name;
  Quantity quantity;
  std::string default_value;
  std::string help;
};

/// Keys accepted by a scenario, including the shared `units` and `seed`.
const std::vector<KeySpec>& scenario_keys(Scenario s);

struct ScenarioConfig {
  Scenario scenario = Scenario::ensemble;
  /// Raw string values; missing keys fall back to scenario defaults.
  std::map<std::string, std::string> params;
  std::string output_path;
  OutputFormat format = OutputFormat::csv;
  std::uint64_t seed = 0;

  /// Rejects unknown keys and unparseable values.
  void validate() const;
  std::string value(const std::string& key) const;
  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  UnitSystem units() const;
};

/// Flat `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::string& path);
/// Splits `key=value`.
std::pair<std::string, std::string> parse_assignment(std::string_view text);

struct Column {
  std::string name;
  Quantity quantity;
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
};

struct ReportValue {
  std::string name;
  double value = 0.0;
  Quantity quantity = Quantity::dimensionless;
};

/// A computed value next to an independent reference.
struct OracleDelta {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double delta = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  Quantity quantity = Quantity::dimensionless;
};

struct RunReport {
  Scenario scenario = Scenario::ensemble;
  UnitSystem units = UnitSystem::natural;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<ReportValue> outputs;
  std::vector<OracleDelta> deltas;
  std::vector<std::string> notes;
  /// Human-readable mismatch listing; empty when every delta passed.
  std::string oracle_diff;
  double wall_seconds = 0.0;

  bool oracles_passed() const;
};

struct RunResult {
  RunReport report;
  Table table;
};

/// Computes the scenario. Output is a pure function of the config.
RunResult run(const ScenarioConfig& cfg);

/// Formats numbers with 17 significant digits.
std::string format_number(double v);

std::string table_to_csv(const Table& table, UnitSystem units);
/// Table plus report (without wall time) under `schema_version`.
std::string result_to_json(const RunResult& result);
/// Report only, with wall time, for the console.
std::string report_to_json(const RunReport& report);

/// Writes the output file in the configured format.
void write_output(const RunResult& result, const ScenarioConfig& cfg);

}  // namespace qens
