#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>

#include "loadcoupling/scenario_io.hpp"
#include "loadcoupling/solver.hpp"
#include "support/instances.hpp"

using namespace loadcoupling;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("loadcoupling_test_" + name);
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i]))
      return false;
  return true;
}

const char* kSingleCell = R"({
  "format": "loadpower-scenario",
  "version": 1,
  "units": {"demands": "bit/s", "rb_bandwidth": "Hz", "noise_power": "W"},
  "num_stations": 1,
  "num_users": 1,
  "num_rb": 1,
  "rb_bandwidth": 1,
  "noise_power": 1,
  "gains": [[1]],
  "demands": [1],
  "serving": [1]
})";

std::string without(std::string text, const std::string& line_start) {
  const auto pos = text.find(line_start);
  REQUIRE(pos != std::string::npos);
  const auto end = text.find('\n', pos);
  text.erase(pos, end - pos + 1);
  return text;
}

} // namespace

TEST_CASE("generate: minimal spec") {
  GeneratorSpec spec;
  spec.num_stations = 1;
  spec.num_users = 1;
  spec.rng_seed = 42;
  const auto model = generate(spec);
  CHECK(model.num_stations() == 1);
  CHECK(validate(model).ok());
}

TEST_CASE("generate: deterministic for a fixed seed") {
  GeneratorSpec spec;
  spec.num_stations = 7;
  spec.num_users = 40;
  spec.rng_seed = 1234;
  const std::string a = scenario_to_text({generate(spec), std::nullopt});
  const std::string b = scenario_to_text({generate(spec), std::nullopt});
  CHECK(a == b);
  spec.rng_seed = 1235;
  CHECK(scenario_to_text({generate(spec), std::nullopt}) != a);
}

TEST_CASE("generate: empty stations are removed") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GeneratorSpec spec;
    spec.num_stations = 5;
    spec.num_users = 3;
    spec.rng_seed = seed;
    const auto model = generate(spec);
    CHECK(model.num_stations() <= 3);
    CHECK(validate(model).ok());
  }
}

TEST_CASE("generate: users attach to their strongest station") {
  GeneratorSpec spec;
  spec.num_stations = 6;
  spec.num_users = 60;
  spec.rng_seed = 3;
  const auto model = generate(spec);
  for (std::size_t j = 0; j < model.num_users(); ++j)
    for (std::size_t i = 0; i < model.num_stations(); ++i)
      CHECK(model.gain(i, j) <= model.gain(model.serving(j), j));
}

TEST_CASE("generate: degenerate spec is rejected") {
  GeneratorSpec spec;
  spec.num_users = 0;
  CHECK_THROWS_AS(generate(spec), ModelError);
  spec = {};
  spec.pathloss_exponent = 1.5;
  CHECK_THROWS_AS(generate(spec), ModelError);
  spec = {};
  spec.demand_min = 2e6;
  CHECK_THROWS_AS(generate(spec), ModelError);
}

TEST_CASE("scenario round trip is bit exact") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    Scenario sc{trial % 2 ? testing::random_network(rng) : testing::random_geometric_network(rng), std::nullopt};
    if (trial % 3 == 0) {
      ReferenceSolution ref;
      ref.load = testing::random_vector(rng, sc.model.num_stations(), 0.0, 1.0);
      ref.power = testing::random_vector(rng, sc.model.num_stations(), 0.0, 1.0);
      ref.solver["tolerance"] = "1e-10";
      sc.reference = ref;
    }
    const auto path = temp_path("roundtrip.json");
    save_scenario(sc, path);
    const Scenario back = load_scenario(path);
    CHECK(back == sc);
    CHECK(bitwise_equal(back.model.data().gains, sc.model.data().gains));
    CHECK(bitwise_equal(back.model.data().demands, sc.model.data().demands));
    std::filesystem::remove(path);
  }
}

TEST_CASE("loaded model reproduces solve results") {
  GeneratorSpec spec;
  spec.num_stations = 4;
  spec.num_users = 20;
  spec.rng_seed = 8;
  const auto model = generate(spec);
  const Scenario back = scenario_from_text(scenario_to_text({model, std::nullopt}));
  const PowerVector p(std::vector<double>(model.num_stations(), 0.4));
  CHECK(solve_load(model, p).solution == solve_load(back.model, p).solution);
}

TEST_CASE("missing field is named") {
  try {
    scenario_from_text(without(kSingleCell, "  \"gains\""));
    FAIL("expected a parse error");
  } catch (const ScenarioParseError& e) {
    CHECK(e.field() == "gains");
    CHECK(std::string(e.what()).find("gains") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry a line number") {
  std::string text = kSingleCell;
  text.replace(text.find("\"num_rb\": 1,"), 12, "\"num_rb\": ,");
  try {
    scenario_from_text(text);
    FAIL("expected a parse error");
  } catch (const ScenarioParseError& e) {
    CHECK(e.line() == 7);
  }
}

TEST_CASE("invalid content reports field and line") {
  std::string text = kSingleCell;
  text.replace(text.find("[[1]]"), 5, "[[0]]");
  try {
    scenario_from_text(text);
    FAIL("expected a parse error");
  } catch (const ScenarioParseError& e) {
    CHECK(e.field() == "gains");
    CHECK(e.line() == 10);
  }
}

TEST_CASE("dB gains and unit annotations are normalized") {
  std::string text = kSingleCell;
  text.replace(text.find("\"gains\": [[1]]"), 14, "\"gain_unit\": \"dB\",\n  \"gains\": [[-30]]");
  text.replace(text.find("\"demands\": \"bit/s\""), 18, "\"demands\": \"kbit/s\"");
  text.replace(text.find("\"rb_bandwidth\": \"Hz\""), 20, "\"rb_bandwidth\": \"kHz\"");
  text.replace(text.find("\"noise_power\": \"W\""), 18, "\"noise_power\": \"dBm\"");
  const Scenario sc = scenario_from_text(text);
  CHECK(sc.model.gain(0, 0) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(sc.model.demand(0) == 1e3);
  CHECK(sc.model.rb_bandwidth() == 1e3);
  CHECK(sc.model.noise_power() == doctest::Approx(std::pow(10.0, -2.9)).epsilon(1e-15)); // 1 dBm
  // Saved back in canonical units.
  const std::string canonical = scenario_to_text(sc);
  CHECK(canonical.find("\"linear\"") != std::string::npos);
  CHECK(scenario_from_text(canonical) == sc);
}

TEST_CASE("unknown unit is rejected") {
  std::string text = kSingleCell;
  text.replace(text.find("\"W\""), 3, "\"hp\"");
  CHECK_THROWS_AS(scenario_from_text(text), ScenarioParseError);
}

TEST_CASE("result bundle round trip") {
  ResultBundle b;
  b.command = "load";
  b.status = "Converged";
  b.iterations = 17;
  b.scalars["residual"] = 3.0e-11;
  b.scalars["tolerance"] = 0.1;
  b.vectors["load"] = {0.1, 1.0 / 3.0, 2.718281828459045};
  b.settings["criterion"] = "absolute";
  const auto path = temp_path("result.json");
  save_result(b, path);
  const auto back = load_result(path);
  CHECK(back == b);
  CHECK(bitwise_equal(back.vectors.at("load"), b.vectors.at("load")));
  CHECK(result_to_text(back) == result_to_text(b));
  std::filesystem::remove(path);
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/dir/none.json"), IoError);
  CHECK_THROWS_AS(save_result(ResultBundle{}, "/nonexistent/dir/out.json"), IoError);
}
