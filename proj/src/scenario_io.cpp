#include "loadcoupling/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace loadcoupling {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kScenarioFormat = "loadpower-scenario";
constexpr std::string_view kResultFormat = "loadpower-result";
constexpr int kFormatVersion = 1;

std::size_t line_at_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" in the document, 0 when absent.
std::size_t line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 0 : line_at_offset(text, pos);
}

// Uniform double in [0, 1) from the top 53 bits; stable across standard
// libraries, unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class Reader {
public:
  explicit Reader(std::string_view text) : text_(text) {
    try {
      root_ = Json::parse(text_);
    } catch (const Json::parse_error& e) {
      throw ScenarioParseError("", line_at_offset(text_, e.byte == 0 ? 0 : e.byte - 1),
                               std::string("malformed document: ") + e.what());
    }
    if (!root_.is_object())
      throw ScenarioParseError("", 1, "document root must be an object");
  }

  [[noreturn]] void fail(std::string_view field, const std::string& message) const {
    throw ScenarioParseError(std::string(field), line_of_key(text_, field),
                             "field '" + std::string(field) + "': " + message);
  }

  const Json& root() const { return root_; }

  const Json& require(const Json& obj, std::string_view field) const {
    const auto it = obj.find(std::string(field));
    if (it == obj.end())
      fail(field, "missing");
    return *it;
  }

  double number(const Json& obj, std::string_view field) const {
    const Json& v = require(obj, field);
    if (!v.is_number())
      fail(field, "expected a number");
    return v.get<double>();
  }

  std::size_t count(const Json& obj, std::string_view field) const {
    const Json& v = require(obj, field);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      fail(field, "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  std::string string(const Json& obj, std::string_view field) const {
    const Json& v = require(obj, field);
    if (!v.is_string())
      fail(field, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const Json& v, std::string_view field) const {
    if (!v.is_array())
      fail(field, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const Json& x : v) {
      if (!x.is_number())
        fail(field, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::string_view text() const { return text_; }

private:
  std::string_view text_;
  Json root_;
};

double unit_scale(const Reader& r, std::string_view field, const std::string& unit,
                  std::initializer_list<std::pair<std::string_view, double>> table) {
  for (const auto& [name, scale] : table)
    if (unit == name)
      return scale;
  r.fail(field, "unsupported unit '" + unit + "'");
}

Json numbers_json(const std::vector<double>& values, std::string_view what) {
  for (double v : values)
    if (!std::isfinite(v))
      throw IoError("cannot serialize non-finite value in " + std::string(what));
  return Json(values);
}

void check_format(const Reader& r, std::string_view expected) {
  if (r.string(r.root(), "format") != expected)
    r.fail("format", "expected '" + std::string(expected) + "'");
  const Json& version = r.require(r.root(), "version");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion)
    r.fail("version", "unsupported version");
}

} // namespace

ScenarioParseError::ScenarioParseError(std::string field, std::size_t line, const std::string& message)
    : std::runtime_error(line ? message + " (line " + std::to_string(line) + ")" : message),
      field_(std::move(field)), line_(line) {}

// -- Generation --------------------------------------------------------------

void GeneratorSpec::validate() const {
  auto bad = [](const std::string& what) { throw ModelError("invalid generator spec: " + what); };
  if (num_stations == 0)
    bad("num_stations must be positive");
  if (num_users == 0)
    bad("num_users must be positive");
  if (!(area_side > 0.0))
    bad("area_side must be > 0");
  if (!(pathloss_exponent >= 2.0))
    bad("pathloss_exponent must be >= 2");
  if (!(reference_gain > 0.0))
    bad("reference_gain must be > 0");
  if (!(demand_min > 0.0) || !(demand_max >= demand_min))
    bad("demand range must satisfy 0 < min <= max");
  if (!(rb_bandwidth > 0.0))
    bad("rb_bandwidth must be > 0");
  if (num_rb == 0)
    bad("num_rb must be positive");
  if (!(noise_power > 0.0))
    bad("noise_power must be > 0");
}

NetworkModel generate(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  const std::size_t M = spec.num_stations;
  const std::size_t N = spec.num_users;

  struct Point {
    double x, y;
  };
  auto place = [&](std::size_t count) {
    std::vector<Point> pts(count);
    for (auto& p : pts) {
      p.x = unit_uniform(rng) * spec.area_side;
      p.y = unit_uniform(rng) * spec.area_side;
    }
    return pts;
  };
  const std::vector<Point> stations = place(M);
  const std::vector<Point> users = place(N);

  std::vector<double> gains(M * N);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      const double dist = std::max(1.0, std::hypot(stations[i].x - users[j].x, stations[i].y - users[j].y));
      gains[i * N + j] = spec.reference_gain * std::pow(dist, -spec.pathloss_exponent);
    }

  std::vector<std::size_t> serving(N);
  std::vector<bool> used(M, false);
  for (std::size_t j = 0; j < N; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < M; ++i)
      if (gains[i * N + j] > gains[best * N + j])
        best = i;
    serving[j] = best;
    used[best] = true;
  }

  std::vector<double> demands(N);
  for (auto& d : demands)
    d = spec.demand_min + unit_uniform(rng) * (spec.demand_max - spec.demand_min);

  std::vector<std::size_t> renumber(M, 0);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < M; ++i)
    if (used[i])
      renumber[i] = kept++;

  NetworkData data;
  data.num_stations = kept;
  data.num_users = N;
  data.gains.reserve(kept * N);
  for (std::size_t i = 0; i < M; ++i)
    if (used[i])
      data.gains.insert(data.gains.end(), gains.begin() + static_cast<std::ptrdiff_t>(i * N),
                        gains.begin() + static_cast<std::ptrdiff_t>((i + 1) * N));
  data.demands = std::move(demands);
  data.serving.resize(N);
  for (std::size_t j = 0; j < N; ++j)
    data.serving[j] = renumber[serving[j]];
  data.num_rb = spec.num_rb;
  data.rb_bandwidth = spec.rb_bandwidth;
  data.noise_power = spec.noise_power;
  return NetworkModel(std::move(data));
}

// -- Scenario files ----------------------------------------------------------

std::string scenario_to_text(const Scenario& scenario) {
  const NetworkData& d = scenario.model.data();
  Json doc;
  doc["format"] = kScenarioFormat;
  doc["version"] = kFormatVersion;
  doc["units"] = {{"demands", "bit/s"}, {"rb_bandwidth", "Hz"}, {"noise_power", "W"}};
  doc["num_stations"] = d.num_stations;
  doc["num_users"] = d.num_users;
  doc["num_rb"] = d.num_rb;
  doc["rb_bandwidth"] = d.rb_bandwidth;
  doc["noise_power"] = d.noise_power;
  doc["gain_unit"] = "linear";
  Json gains = Json::array();
  for (std::size_t i = 0; i < d.num_stations; ++i)
    gains.push_back(std::vector<double>(d.gains.begin() + static_cast<std::ptrdiff_t>(i * d.num_users),
                                        d.gains.begin() + static_cast<std::ptrdiff_t>((i + 1) * d.num_users)));
  doc["gains"] = std::move(gains);
  doc["demands"] = d.demands;
  Json serving = Json::array();
  for (std::size_t s : d.serving)
    serving.push_back(s + 1);
  doc["serving"] = std::move(serving);

  if (scenario.reference) {
    Json ref = Json::object();
    if (scenario.reference->load)
      ref["load"] = numbers_json(*scenario.reference->load, "reference load");
    if (scenario.reference->power)
      ref["power"] = numbers_json(*scenario.reference->power, "reference power");
    Json solver = Json::object();
    for (const auto& [k, v] : scenario.reference->solver)
      solver[k] = v;
    ref["solver"] = std::move(solver);
    doc["reference"] = std::move(ref);
  }
  return doc.dump(2) + "\n";
}

Scenario scenario_from_text(std::string_view text) {
  const Reader r(text);
  const Json& root = r.root();
  check_format(r, kScenarioFormat);

  const Json& units = r.require(root, "units");
  if (!units.is_object())
    r.fail("units", "expected an object");
  const double demand_scale =
      unit_scale(r, "units", r.string(units, "demands"), {{"bit/s", 1.0}, {"kbit/s", 1e3}, {"Mbit/s", 1e6}});
  const double bandwidth_scale =
      unit_scale(r, "units", r.string(units, "rb_bandwidth"), {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}});
  const std::string noise_unit = r.string(units, "noise_power");

  NetworkData d;
  d.num_stations = r.count(root, "num_stations");
  d.num_users = r.count(root, "num_users");
  d.num_rb = r.count(root, "num_rb");
  d.rb_bandwidth = r.number(root, "rb_bandwidth") * bandwidth_scale;
  const double noise = r.number(root, "noise_power");
  if (noise_unit == "W")
    d.noise_power = noise;
  else if (noise_unit == "mW")
    d.noise_power = noise * 1e-3;
  else if (noise_unit == "dBW")
    d.noise_power = std::pow(10.0, noise / 10.0);
  else if (noise_unit == "dBm")
    d.noise_power = std::pow(10.0, (noise - 30.0) / 10.0);
  else
    r.fail("units", "unsupported unit '" + noise_unit + "'");

  bool gains_in_db = false;
  if (root.contains("gain_unit")) {
    const std::string unit = r.string(root, "gain_unit");
    if (unit == "dB")
      gains_in_db = true;
    else if (unit != "linear")
      r.fail("gain_unit", "expected 'linear' or 'dB'");
  }

  const Json& gains = r.require(root, "gains");
  if (!gains.is_array() || gains.size() != d.num_stations)
    r.fail("gains", "expected " + std::to_string(d.num_stations) + " rows");
  for (const Json& row : gains) {
    std::vector<double> values = r.numbers(row, "gains");
    if (values.size() != d.num_users)
      r.fail("gains", "expected rows of " + std::to_string(d.num_users) + " entries");
    for (double g : values)
      d.gains.push_back(gains_in_db ? std::pow(10.0, g / 10.0) : g);
  }

  d.demands = r.numbers(r.require(root, "demands"), "demands");
  for (double& x : d.demands)
    x *= demand_scale;

  const Json& serving = r.require(root, "serving");
  if (!serving.is_array())
    r.fail("serving", "expected an array of station indices");
  for (const Json& s : serving) {
    if (!s.is_number_integer() || s.get<std::int64_t>() < 1)
      r.fail("serving", "station indices are 1-based positive integers");
    d.serving.push_back(s.get<std::size_t>() - 1);
  }

  const ValidationResult check = validate(d);
  if (!check.ok()) {
    const std::string& field = check.violations.front().field;
    throw ScenarioParseError(field, line_of_key(text, field), "invalid scenario: " + check.summary());
  }

  Scenario scenario{NetworkModel(std::move(d)), std::nullopt};
  if (root.contains("reference")) {
    const Json& ref = root["reference"];
    if (!ref.is_object())
      r.fail("reference", "expected an object");
    ReferenceSolution out;
    if (ref.contains("load")) {
      out.load = r.numbers(ref["load"], "load");
      if (out.load->size() != scenario.model.num_stations())
        r.fail("load", "expected one entry per station");
    }
    if (ref.contains("power")) {
      out.power = r.numbers(ref["power"], "power");
      if (out.power->size() != scenario.model.num_stations())
        r.fail("power", "expected one entry per station");
    }
    if (ref.contains("solver")) {
      const Json& solver = ref["solver"];
      if (!solver.is_object())
        r.fail("solver", "expected an object of strings");
      for (const auto& [k, v] : solver.items()) {
        if (!v.is_string())
          r.fail("solver", "expected an object of strings");
        out.solver[k] = v.get<std::string>();
      }
    }
    scenario.reference = std::move(out);
  }
  return scenario;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  write_file(path, scenario_to_text(scenario));
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_text(read_file(path)); }

// -- Result bundles ----------------------------------------------------------

std::string result_to_text(const ResultBundle& bundle) {
  Json doc;
  doc["format"] = kResultFormat;
  doc["version"] = kFormatVersion;
  doc["command"] = bundle.command;
  doc["status"] = bundle.status;
  doc["iterations"] = bundle.iterations;
  Json scalars = Json::object();
  for (const auto& [k, v] : bundle.scalars) {
    if (!std::isfinite(v))
      throw IoError("cannot serialize non-finite scalar '" + k + "'");
    scalars[k] = v;
  }
  doc["scalars"] = std::move(scalars);
  Json vectors = Json::object();
  for (const auto& [k, v] : bundle.vectors)
    vectors[k] = numbers_json(v, k);
  doc["vectors"] = std::move(vectors);
  Json settings = Json::object();
  for (const auto& [k, v] : bundle.settings)
    settings[k] = v;
  doc["settings"] = std::move(settings);
  return doc.dump(2) + "\n";
}

ResultBundle result_from_text(std::string_view text) {
  const Reader r(text);
  const Json& root = r.root();
  check_format(r, kResultFormat);
  ResultBundle bundle;
  bundle.command = r.string(root, "command");
  bundle.status = r.string(root, "status");
  bundle.iterations = r.count(root, "iterations");
  const Json& scalars = r.require(root, "scalars");
  if (!scalars.is_object())
    r.fail("scalars", "expected an object");
  for (const auto& [k, v] : scalars.items()) {
    if (!v.is_number())
      r.fail(k, "expected a number");
    bundle.scalars[k] = v.get<double>();
  }
  const Json& vectors = r.require(root, "vectors");
  if (!vectors.is_object())
    r.fail("vectors", "expected an object");
  for (const auto& [k, v] : vectors.items())
    bundle.vectors[k] = r.numbers(v, k);
  const Json& settings = r.require(root, "settings");
  if (!settings.is_object())
    r.fail("settings", "expected an object");
  for (const auto& [k, v] : settings.items()) {
    if (!v.is_string())
      r.fail(k, "expected a string");
    bundle.settings[k] = v.get<std::string>();
  }
  return bundle;
}

void save_result(const ResultBundle& bundle, const std::filesystem::path& path) {
  write_file(path, result_to_text(bundle));
}

ResultBundle load_result(const std::filesystem::path& path) { return result_from_text(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad())
    throw IoError("error reading '" + path.string() + "'");
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw IoError("error writing '" + path.string() + "'");
}

} // namespace loadcoupling
