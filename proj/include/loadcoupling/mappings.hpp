#pragma once

#include <cstddef>
#include <vector>

#include "loadcoupling/model.hpp"

namespace loadcoupling {

/// ln 2 to long double precision. The zero-power branch of the power map
/// carries this factor explicitly.
inline constexpr long double kLn2 = 0.693147180559945309417232121458176568L;

/// Intra-evaluation parallelism. Stations are independent, and each one is
/// always reduced in the same order, so the output does not depend on
/// `max_threads`.
struct ExecutionOptions {
  unsigned max_threads = 1;

  /// Reads LOADPOWER_MAX_THREADS, falling back to the hardware concurrency.
  static ExecutionOptions from_environment();
};

enum class Diagnostics { None, PerUserTerms };

struct MappingEval {
  std::vector<double> output;
  /// terms[i][k] is the addend of the k-th user of station i (in
  /// NetworkModel::users_of order). Empty unless requested.
  std::vector<std::vector<double>> terms;
};

/// Downlink rate per resource block (bit/s) of user `user` if served by
/// `station`:
///   B log2(1 + p_i g_ij / (sum_{k != i} nu_k p_k g_kj + sigma^2)).
/// Works for any (station, user) pair; the mappings only use serving pairs.
/// Throws DomainError when p_station == 0.
double rate_per_rb(const NetworkModel& model, const LoadVector& load, const PowerVector& power,
                   std::size_t station, std::size_t user);

/// Load mapping J_p evaluated at `load`:
///   [J_p(nu)]_i = sum_{j served by i} d_j / (K omega_ij(nu, p)).
/// Requires every power entry > 0.
MappingEval load_map(const NetworkModel& model, const PowerVector& power, const LoadVector& load,
                     Diagnostics diagnostics = Diagnostics::None, ExecutionOptions exec = {});

/// Power mapping P_nu evaluated at `power`, extended continuously to the
/// boundary of the non-negative orthant. For p_i > 0:
///   (p_i / nu_i) sum_j d_j / (K omega_ij(nu, p)),
/// and for p_i == 0 exactly:
///   sum_j d_j ln2 / (K B g_ij nu_i) * (sum_{k != i} nu_k p_k g_kj + sigma^2).
/// Requires every load entry > 0.
MappingEval power_map(const NetworkModel& model, const LoadVector& load, const PowerVector& power,
                      Diagnostics diagnostics = Diagnostics::None, ExecutionOptions exec = {});

/// x ln(1 + 1/x), strictly increasing on (0, inf).
double rate_growth(double x);

} // namespace loadcoupling
