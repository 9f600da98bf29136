#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "loadcoupling/model.hpp"

namespace loadcoupling {

/// Malformed scenario or result document. `field` names the offending key
/// (empty for syntax errors); `line` is 1-based, 0 when unknown.
class ScenarioParseError : public std::runtime_error {
public:
  ScenarioParseError(std::string field, std::size_t line, const std::string& message);

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string field_;
  std::size_t line_;
};

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// -- Generation --------------------------------------------------------------

struct GeneratorSpec {
  std::size_t num_stations = 3;
  std::size_t num_users = 30;
  double area_side = 1000.0;        // m
  double pathloss_exponent = 3.5;
  double reference_gain = 1e-3;     // linear gain at 1 m
  double demand_min = 1e5;          // bit/s
  double demand_max = 1e6;          // bit/s
  double rb_bandwidth = 180e3;      // Hz
  std::size_t num_rb = 50;
  double noise_power = 1e-14;       // W per resource block
  std::uint64_t rng_seed = 1;

  /// Throws ModelError naming the first bad field.
  void validate() const;
};

/// Places stations, then users, uniformly in [0, area_side]^2 and attaches
/// every user to its highest-gain station. Stations left without users are
/// dropped and the rest renumbered in order. Fully determined by the generator
/// settings, seed included.
NetworkModel generate(const GeneratorSpec& spec);

// -- Scenario files ----------------------------------------------------------

/// Reference solutions stored next to a scenario, typically written by a
/// previous solve.
struct ReferenceSolution {
  std::optional<std::vector<double>> load;
  std::optional<std::vector<double>> power;
  std::map<std::string, std::string> solver; // free-form solver metadata
  friend bool operator==(const ReferenceSolution&, const ReferenceSolution&) = default;
};

struct Scenario {
  NetworkModel model;
  std::optional<ReferenceSolution> reference;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// JSON document, canonical units (bit/s, Hz, W), linear gains, 1-based
/// serving indices. Floats are written in shortest round-trip form.
std::string scenario_to_text(const Scenario& scenario);

/// Accepts gains in dB when "gain_unit" is "dB", and the unit annotations
/// listed in the README; everything is normalized to canonical units.
Scenario scenario_from_text(std::string_view text);

void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

// -- Result bundles ----------------------------------------------------------

/// Machine-readable outcome of one CLI command. Maps keep keys sorted, so the
/// serialized form is stable.
struct ResultBundle {
  std::string command;
  std::string status;
  std::size_t iterations = 0;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> vectors;
  std::map<std::string, std::string> settings;
  friend bool operator==(const ResultBundle&, const ResultBundle&) = default;
};

std::string result_to_text(const ResultBundle& bundle);
ResultBundle result_from_text(std::string_view text);

void save_result(const ResultBundle& bundle, const std::filesystem::path& path);
ResultBundle load_result(const std::filesystem::path& path);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace loadcoupling
