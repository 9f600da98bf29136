#include "loadcoupling/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

namespace loadcoupling {

namespace {

double inf_norm(std::span<const double> x) {
  double out = 0.0;
  for (double v : x)
    out = std::max(out, std::fabs(v));
  return out;
}

double inf_distance(std::span<const double> a, std::span<const double> b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    out = std::max(out, std::fabs(a[i] - b[i]));
  return out;
}

template <class Map>
FixedPointReport iterate(Map&& map, std::vector<double> x, const SolverConfig& config) {
  FixedPointReport report;
  if (config.record_trace)
    report.trace.push_back(x);
  for (std::size_t n = 1; n <= config.max_iterations; ++n) {
    std::vector<double> next = map(x);
    report.iterations = n;
    const bool blown = std::any_of(next.begin(), next.end(),
                                   [&](double v) { return !std::isfinite(v) || v > config.divergence_cap; });
    double residual = inf_distance(next, x);
    if (config.criterion == Convergence::Relative) {
      const double scale = inf_norm(next);
      residual = scale > 0.0 ? residual / scale : residual;
    }
    report.residual = residual;
    x = std::move(next);
    if (config.record_trace)
      report.trace.push_back(x);
    if (blown) {
      report.status = FixedPointStatus::DivergenceCapExceeded;
      report.solution = std::move(x);
      return report;
    }
    if (residual <= config.tolerance) {
      report.status = FixedPointStatus::Converged;
      report.solution = std::move(x);
      return report;
    }
  }
  report.status = FixedPointStatus::MaxIterationsReached;
  report.solution = std::move(x);
  return report;
}

} // namespace

void SolverConfig::validate() const {
  if (!(tolerance > 0.0))
    throw PreconditionError("solver tolerance must be > 0");
  if (max_iterations < 1)
    throw PreconditionError("solver max_iterations must be >= 1");
  if (!(divergence_cap > 0.0))
    throw PreconditionError("solver divergence_cap must be > 0");
}

std::string_view to_string(FixedPointStatus status) {
  switch (status) {
  case FixedPointStatus::Converged:
    return "Converged";
  case FixedPointStatus::MaxIterationsReached:
    return "MaxIterationsReached";
  case FixedPointStatus::DivergenceCapExceeded:
    return "DivergenceCapExceeded";
  }
  return "Unknown";
}

std::string_view to_string(BracketStatus status) {
  switch (status) {
  case BracketStatus::PrecisionReached:
    return "PrecisionReached";
  case BracketStatus::MaxIterationsReached:
    return "MaxIterationsReached";
  case BracketStatus::Stalled:
    return "Stalled";
  }
  return "Unknown";
}

FixedPointReport solve_load(const NetworkModel& model, const PowerVector& power, const SolverConfig& config,
                            const std::optional<LoadVector>& initial) {
  config.validate();
  LoadVector start = initial ? *initial : LoadVector::zeros(model.num_stations());
  if (start.size() != model.num_stations())
    throw ModelError("initial load has wrong length");
  // Evaluate once up front so domain errors surface before iterating.
  (void)load_map(model, power, start, Diagnostics::None, config.exec);
  return iterate(
      [&](const std::vector<double>& x) {
        return load_map(model, power, LoadVector(x), Diagnostics::None, config.exec).output;
      },
      start.values(), config);
}

FixedPointReport solve_power(const NetworkModel& model, const LoadVector& target_load, const SolverConfig& config,
                             const std::optional<PowerVector>& initial) {
  config.validate();
  PowerVector start = initial ? *initial : PowerVector::zeros(model.num_stations());
  if (start.size() != model.num_stations())
    throw ModelError("initial power has wrong length");
  (void)power_map(model, target_load, start, Diagnostics::None, config.exec);
  return iterate(
      [&](const std::vector<double>& x) {
        return power_map(model, target_load, PowerVector(x), Diagnostics::None, config.exec).output;
      },
      start.values(), config);
}

bool check_certificate(const NetworkModel& model, const PowerVector& power, const LoadVector& candidate) {
  const auto mapped = load_map(model, power, candidate).output;
  for (std::size_t i = 0; i < mapped.size(); ++i)
    if (mapped[i] > candidate[i])
      return false;
  return true;
}

bool check_certificate(const NetworkModel& model, const LoadVector& target_load, const PowerVector& candidate) {
  const auto mapped = power_map(model, target_load, candidate).output;
  for (std::size_t i = 0; i < mapped.size(); ++i)
    if (mapped[i] > candidate[i])
      return false;
  return true;
}

PowerVector initial_upper_bracket(const LoadVector& current_load, const PowerVector& current_power,
                                  const LoadVector& target_load) {
  if (current_load.size() != current_power.size() || current_load.size() != target_load.size())
    throw ModelError("initial_upper_bracket: vector lengths differ");
  std::vector<double> p(current_power.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(target_load[i] > 0.0))
      throw DomainError("power map requires strictly positive target load");
    p[i] = current_power[i] * (current_load[i] / target_load[i]);
  }
  return PowerVector(std::move(p));
}

BracketReport plan_power_for_load_increase(const NetworkModel& model, const LoadVector& current_load,
                                           const PowerVector& current_power, const LoadVector& target_load,
                                           const PlannerConfig& config) {
  const std::size_t M = model.num_stations();
  if (current_load.size() != M || current_power.size() != M || target_load.size() != M)
    throw ModelError("planner: vectors must have length " + std::to_string(M));
  if (!(config.epsilon > 0.0))
    throw PreconditionError("planner epsilon must be > 0");
  if (!current_load.all_positive())
    throw PreconditionError("current load must be strictly positive");
  if (!current_power.all_positive())
    throw PreconditionError("current power must be strictly positive");

  bool increased = false;
  for (std::size_t i = 0; i < M; ++i) {
    if (target_load[i] < current_load[i])
      throw PreconditionError("target load must be >= current load: station " + std::to_string(i + 1) + " has " +
                              std::to_string(target_load[i]) + " < " + std::to_string(current_load[i]));
    increased = increased || target_load[i] > current_load[i];
  }
  if (!increased)
    throw PreconditionError("target load must differ from the current load");

  const auto reproduced = power_map(model, current_load, current_power, Diagnostics::None, config.exec).output;
  const double inconsistency = inf_distance(reproduced, current_power.values()) / inf_norm(current_power.values());
  if (!(inconsistency <= config.consistency_tolerance))
    throw PreconditionError("inputs are not a load/power fixed-point pair: relative residual " +
                            std::to_string(inconsistency) + " exceeds " +
                            std::to_string(config.consistency_tolerance));

  const PowerVector start = initial_upper_bracket(current_load, current_power, target_load);
  std::vector<double> lower(M, 0.0);
  std::vector<double> upper = start.values();
  double gap = inf_norm(upper);
  std::size_t n = 0;

  BracketReport report;
  report.start_certified = check_certificate(model, target_load, start);
  if (config.record_trace)
    report.trace.push_back({lower, upper, gap});

  // The lower sequence starts at zero and relies on the extended branch.
  const bool concurrent = config.exec.max_threads >= 2 && M >= 64;
  const ExecutionOptions inner{concurrent ? std::max(1u, config.exec.max_threads / 2) : config.exec.max_threads};
  auto step = [&](const std::vector<double>& x) {
    return power_map(model, target_load, PowerVector(x), Diagnostics::None, inner).output;
  };

  report.status = BracketStatus::PrecisionReached;
  while (gap > config.epsilon && (!config.max_iterations || n <= *config.max_iterations)) {
    std::vector<double> next_lower;
    std::vector<double> next_upper;
    if (concurrent) {
      auto pending = std::async(std::launch::async, step, std::cref(lower));
      next_upper = step(upper);
      next_lower = pending.get();
    } else {
      next_lower = step(lower);
      next_upper = step(upper);
    }
    const bool stalled = next_lower == lower && next_upper == upper;
    lower = std::move(next_lower);
    upper = std::move(next_upper);
    gap = inf_distance(lower, upper);
    ++n;
    if (config.record_trace)
      report.trace.push_back({lower, upper, gap});
    if (stalled && gap > config.epsilon) {
      report.status = BracketStatus::Stalled;
      break;
    }
  }
  if (gap > config.epsilon && report.status != BracketStatus::Stalled)
    report.status = BracketStatus::MaxIterationsReached;

  report.power_estimate = PowerVector(std::move(upper));
  report.lower = std::move(lower);
  report.certified_error = gap;
  report.iterations = n;
  return report;
}

} // namespace loadcoupling
