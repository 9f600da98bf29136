// loadpower: command-line front end for the load-coupling solvers.
//
// Exit codes: 0 success, 2 input or precondition error, 3 non-convergence
// (or accuracy target missed), 4 I/O error.

#include <charconv>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loadcoupling/mappings.hpp"
#include "loadcoupling/model.hpp"
#include "loadcoupling/scenario_io.hpp"
#include "loadcoupling/solver.hpp"

namespace lc = loadcoupling;

namespace {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kNotConverged = 3,
  kIoError = 4,
};

constexpr double kRoundTripThreshold = 1e-6;
constexpr double kPowerConsistencyWarning = 1e-6;

class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// Shortest representation that reads back to the same double.
std::string exact(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : format_number(v);
}

// Numbers separated by commas and/or whitespace.
std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  auto is_sep = [](char c) { return c == ',' || std::isspace(static_cast<unsigned char>(c)); };
  while (pos < text.size()) {
    while (pos < text.size() && is_sep(text[pos]))
      ++pos;
    if (pos == text.size())
      break;
    std::size_t end = pos;
    while (end < text.size() && !is_sep(text[end]))
      ++end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, value);
    if (ec != std::errc() || ptr != text.data() + end)
      throw InputError(what + ": cannot parse '" + text.substr(pos, end - pos) + "' as a number");
    out.push_back(value);
    pos = end;
  }
  if (out.empty())
    throw InputError(what + ": empty vector");
  return out;
}

// A vector given inline or through a file, never both. A file is either a
// plain list of numbers or a result bundle, from which `bundle_key` is taken.
struct VectorOption {
  std::string name;
  std::string inline_value;
  std::string file;

  void add_to(CLI::App& app, const std::string& flag, const std::string& help) {
    name = flag;
    app.add_option("--" + flag, inline_value, help + " (comma-separated)");
    app.add_option("--" + flag + "-file", file, help + " (number list or result file)");
  }

  std::vector<double> get(const std::string& bundle_key) const {
    if (!inline_value.empty() && !file.empty())
      throw InputError("--" + name + " and --" + name + "-file are both given; pass exactly one");
    if (!inline_value.empty())
      return parse_numbers(inline_value, "--" + name);
    if (file.empty())
      throw InputError("--" + name + " or --" + name + "-file is required");
    const std::string text = lc::read_file(file);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      const lc::ResultBundle bundle = lc::result_from_text(text);
      const auto it = bundle.vectors.find(bundle_key);
      if (it == bundle.vectors.end())
        throw InputError(file + ": result file has no '" + bundle_key + "' vector");
      return it->second;
    }
    return parse_numbers(text, file);
  }
};

struct SolverOptions {
  double tolerance = lc::SolverConfig{}.tolerance;
  std::size_t max_iterations = lc::SolverConfig{}.max_iterations;
  double divergence_cap = lc::SolverConfig{}.divergence_cap;
  bool relative = false;

  void add_to(CLI::App& app) {
    app.add_option("--tol", tolerance, "Convergence tolerance (infinity norm of successive iterates)")
        ->capture_default_str();
    app.add_option("--max-iter", max_iterations, "Maximum number of iterations")->capture_default_str();
    app.add_option("--cap", divergence_cap, "Stop when an iterate component exceeds this value")
        ->capture_default_str();
    app.add_flag("--relative", relative, "Relative instead of absolute convergence criterion");
  }

  lc::SolverConfig config() const {
    lc::SolverConfig c;
    c.tolerance = tolerance;
    c.max_iterations = max_iterations;
    c.divergence_cap = divergence_cap;
    c.criterion = relative ? lc::Convergence::Relative : lc::Convergence::Absolute;
    c.exec = lc::ExecutionOptions::from_environment();
    return c;
  }

  void describe(std::ostream& os) const {
    os << "solver: tolerance=" << exact(tolerance) << " max_iterations=" << max_iterations
       << " divergence_cap=" << exact(divergence_cap) << " criterion=" << (relative ? "relative" : "absolute")
       << " threads=" << lc::ExecutionOptions::from_environment().max_threads << "\n";
  }

  void record(lc::ResultBundle& bundle) const {
    bundle.scalars["tolerance"] = tolerance;
    bundle.scalars["divergence_cap"] = divergence_cap;
    bundle.settings["max_iterations"] = std::to_string(max_iterations);
    bundle.settings["criterion"] = relative ? "relative" : "absolute";
  }
};

void print_report_tail(const lc::FixedPointReport& report) {
  std::cout << "status: " << lc::to_string(report.status) << "\n"
            << "iterations: " << report.iterations << "\n"
            << "residual: " << format_number(report.residual) << "\n";
}

int status_exit(const lc::FixedPointReport& report) {
  if (report.converged())
    return kSuccess;
  std::cerr << "error: solver did not converge: " << lc::to_string(report.status) << "\n";
  return kNotConverged;
}

// -- gen ---------------------------------------------------------------------

struct GenCommand {
  lc::GeneratorSpec spec;
  std::string spec_file;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen", "Generate a random scenario");
    cmd->add_option("--stations", spec.num_stations, "Number of stations placed")->capture_default_str();
    cmd->add_option("--users", spec.num_users, "Number of users")->capture_default_str();
    cmd->add_option("--seed", spec.rng_seed, "Random seed")->capture_default_str();
    cmd->add_option("--area", spec.area_side, "Side of the square area (m)")->capture_default_str();
    cmd->add_option("--exponent", spec.pathloss_exponent, "Pathloss exponent (>= 2)")->capture_default_str();
    cmd->add_option("--ref-gain", spec.reference_gain, "Linear gain at 1 m")->capture_default_str();
    cmd->add_option("--demand-min", spec.demand_min, "Minimum user demand (bit/s)")->capture_default_str();
    cmd->add_option("--demand-max", spec.demand_max, "Maximum user demand (bit/s)")->capture_default_str();
    cmd->add_option("--rb-bandwidth", spec.rb_bandwidth, "Bandwidth per resource block (Hz)")
        ->capture_default_str();
    cmd->add_option("--num-rb", spec.num_rb, "Number of resource blocks")->capture_default_str();
    cmd->add_option("--noise", spec.noise_power, "Noise power per resource block (W)")->capture_default_str();
    cmd->add_option("--spec", spec_file, "Generator spec file (JSON object with the same keys)");
    cmd->add_option("--out", out, "Scenario file to write")->required();
    cmd->callback([this, cmd] { code = run(*cmd); });
  }

  int code = kSuccess;

  static void read_spec(const std::string& path, lc::GeneratorSpec& spec) {
    const auto j = nlohmann::json::parse(lc::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw InputError(path + ": generator spec must be a JSON object");
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key))
        field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    try {
      take("stations", spec.num_stations);
      take("users", spec.num_users);
      take("seed", spec.rng_seed);
      take("area", spec.area_side);
      take("exponent", spec.pathloss_exponent);
      take("ref_gain", spec.reference_gain);
      take("demand_min", spec.demand_min);
      take("demand_max", spec.demand_max);
      take("rb_bandwidth", spec.rb_bandwidth);
      take("num_rb", spec.num_rb);
      take("noise", spec.noise_power);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": " + e.what());
    }
  }

  int run(const CLI::App& cmd) {
    if (!spec_file.empty()) {
      for (const char* flag : {"--stations", "--users", "--seed", "--area", "--exponent", "--ref-gain",
                               "--demand-min", "--demand-max", "--rb-bandwidth", "--num-rb", "--noise"})
        if (cmd.count(flag) > 0)
          throw InputError(std::string("--spec and ") + flag + " are both given; pass the value in one place");
      read_spec(spec_file, spec);
    }
    const lc::NetworkModel model = lc::generate(spec);
    lc::save_scenario({model, std::nullopt}, out);
    std::cout << "wrote " << out << ": " << model.num_stations() << " stations, " << model.num_users()
              << " users\n";
    return kSuccess;
  }
};

// -- load --------------------------------------------------------------------

struct LoadCommand {
  std::string scenario;
  VectorOption power;
  SolverOptions solver;
  std::string out;
  bool verbose = false;
  int code = kSuccess;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("load", "Load induced by a power allocation");
    cmd->add_option("scenario", scenario, "Scenario file")->required();
    power.add_to(*cmd, "power", "Power per resource block of every station (W)");
    solver.add_to(*cmd);
    cmd->add_option("--out", out, "Result file to write");
    cmd->add_flag("--verbose", verbose, "Print solver settings");
    cmd->callback([this] { code = run(); });
  }

  int run() {
    const lc::Scenario sc = lc::load_scenario(scenario);
    const lc::PowerVector p(power.get("power"));
    if (verbose)
      solver.describe(std::cout);
    const lc::FixedPointReport report = lc::solve_load(sc.model, p, solver.config());
    const lc::LoadVector load(report.solution);
    const std::vector<double> energy = lc::total_power(sc.model, load, p);

    std::cout << "station load operational total_power_W\n";
    for (std::size_t i = 0; i < load.size(); ++i)
      std::cout << i + 1 << " " << format_number(load[i]) << " " << (load[i] <= 1.0 ? "yes" : "no") << " "
                << format_number(energy[i]) << "\n";
    std::cout << "operational: " << (load.is_operational() ? "yes" : "no") << "\n";
    print_report_tail(report);

    if (!out.empty()) {
      lc::ResultBundle bundle;
      bundle.command = "load";
      bundle.status = std::string(lc::to_string(report.status));
      bundle.iterations = report.iterations;
      bundle.scalars["residual"] = report.residual;
      solver.record(bundle);
      bundle.settings["operational"] = load.is_operational() ? "true" : "false";
      bundle.vectors["power"] = p.values();
      bundle.vectors["load"] = load.values();
      bundle.vectors["total_power"] = energy;
      lc::save_result(bundle, out);
    }
    return status_exit(report);
  }
};

// -- power -------------------------------------------------------------------

struct PowerCommand {
  std::string scenario;
  VectorOption load;
  SolverOptions solver;
  std::string out;
  bool verbose = false;
  int code = kSuccess;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("power", "Power allocation inducing a target load");
    cmd->add_option("scenario", scenario, "Scenario file")->required();
    load.add_to(*cmd, "load", "Target load of every station");
    solver.add_to(*cmd);
    cmd->add_option("--out", out, "Result file to write");
    cmd->add_flag("--verbose", verbose, "Print solver settings");
    cmd->callback([this] { code = run(); });
  }

  int run() {
    const lc::Scenario sc = lc::load_scenario(scenario);
    const lc::LoadVector target(load.get("load"));
    if (verbose)
      solver.describe(std::cout);
    const lc::FixedPointReport report = lc::solve_power(sc.model, target, solver.config());

    std::cout << "station power_W\n";
    for (std::size_t i = 0; i < report.solution.size(); ++i)
      std::cout << i + 1 << " " << format_number(report.solution[i]) << "\n";
    print_report_tail(report);

    if (report.converged()) {
      const lc::PowerVector p(report.solution);
      const auto implied = lc::load_map(sc.model, p, target).output;
      double worst = 0.0;
      for (std::size_t i = 0; i < implied.size(); ++i)
        worst = std::max(worst, std::fabs(implied[i] - target[i]) / target[i]);
      if (worst > kPowerConsistencyWarning)
        std::cerr << "warning: the power found reproduces the target load only to relative error "
                  << format_number(worst) << "\n";
      if (!target.is_operational())
        std::cerr << "warning: target load exceeds 1 at some station\n";
    }

    if (!out.empty()) {
      lc::ResultBundle bundle;
      bundle.command = "power";
      bundle.status = std::string(lc::to_string(report.status));
      bundle.iterations = report.iterations;
      bundle.scalars["residual"] = report.residual;
      solver.record(bundle);
      bundle.vectors["load"] = target.values();
      bundle.vectors["power"] = report.solution;
      lc::save_result(bundle, out);
    }
    return status_exit(report);
  }
};

// -- plan --------------------------------------------------------------------

struct PlanCommand {
  std::string scenario;
  VectorOption current_load;
  VectorOption current_power;
  VectorOption target_load;
  double epsilon = lc::PlannerConfig{}.epsilon;
  std::size_t max_iterations = *lc::PlannerConfig{}.max_iterations;
  bool unbounded = false;
  double consistency_tolerance = lc::PlannerConfig{}.consistency_tolerance;
  std::string out;
  bool verbose = false;
  int code = kSuccess;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("plan", "Certified power for an increased load");
    cmd->add_option("scenario", scenario, "Scenario file")->required();
    current_load.add_to(*cmd, "current-load", "Current load");
    current_power.add_to(*cmd, "current-power", "Current power per resource block (W)");
    target_load.add_to(*cmd, "target-load", "Target load (>= current load)");
    cmd->add_option("--epsilon", epsilon, "Required certified precision (W)")->capture_default_str();
    cmd->add_option("--max-iter", max_iterations, "Iteration cap m (loop runs while n <= m)")
        ->capture_default_str();
    cmd->add_flag("--unbounded", unbounded, "No iteration cap");
    cmd->add_option("--consistency-tol", consistency_tolerance,
                    "Allowed relative residual of the current load/power pair")
        ->capture_default_str();
    cmd->add_option("--out", out, "Result file to write");
    cmd->add_flag("--verbose", verbose, "Print planner settings");
    cmd->callback([this, cmd] {
      if (unbounded && cmd->count("--max-iter") > 0)
        throw InputError("--unbounded and --max-iter are both given");
      code = run();
    });
  }

  int run() {
    const lc::Scenario sc = lc::load_scenario(scenario);
    const lc::LoadVector nu_now(current_load.get("load"));
    const lc::PowerVector p_now(current_power.get("power"));
    const lc::LoadVector nu_next(target_load.get("load"));

    lc::PlannerConfig config;
    config.epsilon = epsilon;
    config.max_iterations = unbounded ? std::nullopt : std::optional<std::size_t>(max_iterations);
    config.consistency_tolerance = consistency_tolerance;
    config.exec = lc::ExecutionOptions::from_environment();
    if (verbose)
      std::cout << "planner: epsilon=" << exact(epsilon)
                << " max_iterations=" << (unbounded ? std::string("unbounded") : std::to_string(max_iterations))
                << " consistency_tolerance=" << exact(consistency_tolerance)
                << " threads=" << config.exec.max_threads << "\n";

    const lc::BracketReport report = lc::plan_power_for_load_increase(sc.model, nu_now, p_now, nu_next, config);
    const auto before = lc::total_power(sc.model, nu_now, p_now);
    const auto after = lc::total_power(sc.model, nu_next, report.power_estimate);
    std::vector<double> delta(before.size());
    for (std::size_t i = 0; i < delta.size(); ++i)
      delta[i] = after[i] - before[i];

    std::cout << "station power_W lower_W energy_before_W energy_after_W delta_W\n";
    for (std::size_t i = 0; i < delta.size(); ++i)
      std::cout << i + 1 << " " << format_number(report.power_estimate[i]) << " "
                << format_number(report.lower[i]) << " " << format_number(before[i]) << " "
                << format_number(after[i]) << " " << format_number(delta[i]) << "\n";
    std::cout << "status: " << lc::to_string(report.status) << "\n"
              << "certified_error: " << format_number(report.certified_error) << "\n"
              << "iterations: " << report.iterations << "\n"
              << "start_certified: " << (report.start_certified ? "yes" : "no") << "\n";
    if (!report.start_certified)
      std::cerr << "warning: the starting upper bracket is not a certificate; the current pair is a fixed point "
                   "only approximately, so the error bound holds only up to that inconsistency\n";
    for (std::size_t i = 0; i < delta.size(); ++i)
      if (!(delta[i] < 0.0))
        std::cerr << "warning: station " << i + 1 << " does not save energy (delta " << format_number(delta[i])
                  << ")\n";

    if (!out.empty()) {
      lc::ResultBundle bundle;
      bundle.command = "plan";
      bundle.status = std::string(lc::to_string(report.status));
      bundle.iterations = report.iterations;
      bundle.scalars["certified_error"] = report.certified_error;
      bundle.scalars["epsilon"] = epsilon;
      bundle.scalars["consistency_tolerance"] = consistency_tolerance;
      bundle.settings["max_iterations"] = unbounded ? "unbounded" : std::to_string(max_iterations);
      bundle.settings["start_certified"] = report.start_certified ? "true" : "false";
      bundle.vectors["current_load"] = nu_now.values();
      bundle.vectors["current_power"] = p_now.values();
      bundle.vectors["load"] = nu_next.values();
      bundle.vectors["power"] = report.power_estimate.values();
      bundle.vectors["lower"] = report.lower;
      bundle.vectors["energy_before"] = before;
      bundle.vectors["energy_after"] = after;
      bundle.vectors["energy_delta"] = delta;
      lc::save_result(bundle, out);
    }
    if (report.status != lc::BracketStatus::PrecisionReached) {
      std::cerr << "error: precision not reached: " << lc::to_string(report.status) << "\n";
      return kNotConverged;
    }
    return kSuccess;
  }
};

// -- roundtrip ---------------------------------------------------------------

struct RoundTripCommand {
  std::string scenario;
  VectorOption power;
  SolverOptions solver;
  std::string out;
  bool verbose = false;
  int code = kSuccess;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("roundtrip", "Self-check: power -> load -> power");
    cmd->add_option("scenario", scenario, "Scenario file")->required();
    power.add_to(*cmd, "power", "Power per resource block of every station (W)");
    solver.add_to(*cmd);
    cmd->add_option("--out", out, "Result file to write");
    cmd->add_flag("--verbose", verbose, "Print solver settings");
    cmd->callback([this] { code = run(); });
  }

  int run() {
    const lc::Scenario sc = lc::load_scenario(scenario);
    const lc::PowerVector p(power.get("power"));
    if (verbose)
      solver.describe(std::cout);
    const lc::SolverConfig config = solver.config();

    const lc::FixedPointReport forward = lc::solve_load(sc.model, p, config);
    std::cout << "load solve: " << lc::to_string(forward.status) << " after " << forward.iterations
              << " iterations\n";
    if (!forward.converged())
      return status_exit(forward);
    const lc::FixedPointReport back = lc::solve_power(sc.model, lc::LoadVector(forward.solution), config);
    std::cout << "power solve: " << lc::to_string(back.status) << " after " << back.iterations << " iterations\n";
    if (!back.converged())
      return status_exit(back);

    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      diff = std::max(diff, std::fabs(back.solution[i] - p[i]));
      scale = std::max(scale, std::fabs(p[i]));
    }
    const double error = diff / scale;
    const bool pass = error <= kRoundTripThreshold;
    std::cout << "relative_error: " << format_number(error) << "\n"
              << "result: " << (pass ? "pass" : "fail") << "\n";

    if (!out.empty()) {
      lc::ResultBundle bundle;
      bundle.command = "roundtrip";
      bundle.status = pass ? "Pass" : "Fail";
      bundle.iterations = forward.iterations + back.iterations;
      bundle.scalars["relative_error"] = error;
      bundle.scalars["threshold"] = kRoundTripThreshold;
      solver.record(bundle);
      bundle.vectors["power"] = p.values();
      bundle.vectors["load"] = forward.solution;
      bundle.vectors["recovered_power"] = back.solution;
      lc::save_result(bundle, out);
    }
    return pass ? kSuccess : kNotConverged;
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load and power solvers for the LTE load-coupling model"};
  app.require_subcommand(1);

  GenCommand gen;
  LoadCommand load;
  PowerCommand power;
  PlanCommand plan;
  RoundTripCommand roundtrip;
  gen.attach(app);
  load.attach(app);
  power.attach(app);
  plan.attach(app);
  roundtrip.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  } catch (const lc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const lc::ScenarioParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const lc::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) { // ModelError, PreconditionError
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }

  for (const int code : {gen.code, load.code, power.code, plan.code, roundtrip.code})
    if (code != kSuccess)
      return code;
  return kSuccess;
}
