#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "loadcoupling/mappings.hpp"
#include "loadcoupling/model.hpp"

namespace loadcoupling {

/// Raised when solver inputs violate a documented precondition (bad
/// configuration, non-increasing target load, inconsistent current pair).
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Convergence {
  Absolute, // ||x_{n+1} - x_n||_inf <= tolerance
  Relative, // ||x_{n+1} - x_n||_inf <= tolerance * ||x_{n+1}||_inf
};

struct SolverConfig {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
  double divergence_cap = 1e12;
  bool record_trace = false;
  Convergence criterion = Convergence::Absolute;
  ExecutionOptions exec{};

  /// Throws PreconditionError on a non-positive tolerance or cap, or zero
  /// iterations.
  void validate() const;
};

enum class FixedPointStatus { Converged, MaxIterationsReached, DivergenceCapExceeded };

std::string_view to_string(FixedPointStatus status);

struct FixedPointReport {
  std::vector<double> solution;
  /// Successive-iterate difference in the configured criterion's measure.
  double residual = 0.0;
  std::size_t iterations = 0;
  FixedPointStatus status = FixedPointStatus::MaxIterationsReached;
  /// Every iterate, starting with the initial vector. Empty unless
  /// SolverConfig::record_trace.
  std::vector<std::vector<double>> trace;

  bool converged() const noexcept { return status == FixedPointStatus::Converged; }
};

/// Load induced by `power`: iterates nu <- J_p(nu) from `initial` (zero by
/// default). DivergenceCapExceeded and MaxIterationsReached mean no fixed
/// point was found, not that none exists.
FixedPointReport solve_load(const NetworkModel& model, const PowerVector& power, const SolverConfig& config = {},
                            const std::optional<LoadVector>& initial = std::nullopt);

/// Power inducing `target_load`: iterates p <- P_nu(p) from `initial` (zero
/// by default).
FixedPointReport solve_power(const NetworkModel& model, const LoadVector& target_load,
                             const SolverConfig& config = {}, const std::optional<PowerVector>& initial = std::nullopt);

/// True iff J_p(candidate) <= candidate componentwise, which proves that the
/// load map with fixed `power` has a (unique) fixed point.
bool check_certificate(const NetworkModel& model, const PowerVector& power, const LoadVector& candidate);

/// True iff P_nu(candidate) <= candidate componentwise, which proves that a
/// power vector inducing `target_load` exists.
bool check_certificate(const NetworkModel& model, const LoadVector& target_load, const PowerVector& candidate);

// -- Bracketed planning ------------------------------------------------------

struct PlannerConfig {
  double epsilon = 1e-9;
  /// Iteration cap m; the loop runs while n <= m, so at most m + 1 updates.
  /// nullopt runs until the precision is reached.
  std::optional<std::size_t> max_iterations = 100000;
  /// Bound on ||P_nu'(p') - p'||_inf / ||p'||_inf for the current pair.
  double consistency_tolerance = 1e-6;
  bool record_trace = false;
  ExecutionOptions exec{};
};

enum class BracketStatus {
  PrecisionReached,
  MaxIterationsReached,
  /// Both iterates stopped changing in floating point before the gap fell
  /// to epsilon (epsilon below the attainable resolution).
  Stalled,
};

std::string_view to_string(BracketStatus status);

struct BracketStep {
  std::vector<double> lower;
  std::vector<double> upper;
  double gap = 0.0;
};

struct BracketReport {
  /// Final upper iterate; ||power_estimate - p''||_inf <= certified_error.
  PowerVector power_estimate;
  std::vector<double> lower;
  double certified_error = 0.0;
  std::size_t iterations = 0;
  BracketStatus status = BracketStatus::MaxIterationsReached;
  /// Whether P(start) <= start held for the starting upper bracket. When the
  /// current pair is a fixed point only up to rounding, a weakly coupled
  /// station can fail this by an ulp, and its upper iterate may then rise
  /// at the first step instead of falling.
  bool start_certified = false;
  /// Starts with the initial bracket (0, p'/alpha). Empty unless requested.
  std::vector<BracketStep> trace;
};

/// Starting upper bracket p'_i * nu'_i / nu''_i.
PowerVector initial_upper_bracket(const LoadVector& current_load, const PowerVector& current_power,
                                  const LoadVector& target_load);

/// Power that induces the increased load `target_load`, given the consistent
/// current operating point (current_load, current_power).
///
/// Runs the power iteration from below (zero vector) and from above
/// (initial_upper_bracket) in lockstep. The lower sequence increases, the
/// upper one decreases, and the true answer always lies between them, so the
/// gap ||lower - upper||_inf is a certified error bound for the returned
/// upper iterate.
///
/// Throws PreconditionError unless target_load >= current_load with at least
/// one strict increase, and unless the current pair is a fixed point of the
/// power map within PlannerConfig::consistency_tolerance.
BracketReport plan_power_for_load_increase(const NetworkModel& model, const LoadVector& current_load,
                                           const PowerVector& current_power, const LoadVector& target_load,
                                           const PlannerConfig& config = {});

} // namespace loadcoupling
