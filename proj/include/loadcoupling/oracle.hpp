#pragma once

#include <stdexcept>

// Reference solutions for tiny instances. Written straight from the model
// equations with plain double arithmetic; nothing here calls into the
// mappings or solver code.

namespace loadcoupling::oracle {

class NoSolutionLocated : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Method { ClosedFormSingleCell, ScalarBisection };

struct OracleResult {
  double value = 0.0;
  Method method = Method::ScalarBisection;
  double achieved_precision = 0.0;
};

/// Exact power per RB for a lone station with one user:
///   (sigma^2 / g) (2^{d / (K B nu)} - 1).
double single_cell_power(double demand, double num_rb, double rb_bandwidth, double gain, double noise_power,
                         double load);

/// Exact load of a lone station with one user: d / (K B log2(1 + p g / sigma^2)).
double single_cell_load(double demand, double num_rb, double rb_bandwidth, double gain, double noise_power,
                        double power);

/// Two identical stations, one user each; user of station i sees its own
/// station with gain g_self and the other with g_cross.
struct SymmetricTwoCell {
  double g_self = 1.0;
  double g_cross = 0.5;
  double demand = 1.0;
  double num_rb = 1.0;
  double rb_bandwidth = 1.0;
  double noise_power = 1.0;
};

enum class Unknown {
  LoadGivenPower, // given p, find v = d / (K B log2(1 + p g_s / (v p g_c + sigma^2)))
  PowerGivenLoad, // given nu, find w with nu = d / (K B log2(1 + w g_s / (nu w g_c + sigma^2)))
};

/// Scalar bisection on the symmetric fixed-point equation. The bracket
/// starts at [1e-12, 1] and its upper end doubles until the sign changes,
/// up to 1e15. Stops when the half-width is <= precision or the bracket
/// cannot be split further.
OracleResult symmetric_two_cell(const SymmetricTwoCell& cell, Unknown unknown, double given, double precision);

/// |v - RHS(v)| of the symmetric load equation.
double symmetric_load_residual(const SymmetricTwoCell& cell, double power, double load);

/// |w - (w / nu) d / (K B log2(1 + w g_s / (nu w g_c + sigma^2)))|.
double symmetric_power_residual(const SymmetricTwoCell& cell, double load, double power);

} // namespace loadcoupling::oracle
