#include "loadcoupling/oracle.hpp"

#include <cmath>
#include <functional>

namespace loadcoupling::oracle {

namespace {

constexpr double kBracketLow = 1e-12;
constexpr double kBracketCap = 1e15;

// Root of an increasing function h with h(low) < 0.
OracleResult bisect(const std::function<double(double)>& h, double precision) {
  double lo = kBracketLow;
  double hi = 1.0;
  if (h(lo) >= 0.0)
    throw NoSolutionLocated("bisection: no sign change at the lower end of the bracket");
  while (h(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > kBracketCap)
      throw NoSolutionLocated("bisection: no solution located below 1e15");
  }
  while (0.5 * (hi - lo) > precision) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (h(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), Method::ScalarBisection, 0.5 * (hi - lo)};
}

double symmetric_load_rhs(const SymmetricTwoCell& c, double power, double load) {
  const double sinr = power * c.g_self / (load * power * c.g_cross + c.noise_power);
  return c.demand / (c.num_rb * c.rb_bandwidth * std::log2(1.0 + sinr));
}

} // namespace

double single_cell_power(double demand, double num_rb, double rb_bandwidth, double gain, double noise_power,
                         double load) {
  return noise_power / gain * (std::exp2(demand / (num_rb * rb_bandwidth * load)) - 1.0);
}

double single_cell_load(double demand, double num_rb, double rb_bandwidth, double gain, double noise_power,
                        double power) {
  return demand / (num_rb * rb_bandwidth * std::log2(1.0 + power * gain / noise_power));
}

OracleResult symmetric_two_cell(const SymmetricTwoCell& cell, Unknown unknown, double given, double precision) {
  if (unknown == Unknown::LoadGivenPower) {
    // v - RHS(v) increases: RHS is increasing with slope below RHS(v)/v.
    return bisect([&](double v) { return v - symmetric_load_rhs(cell, given, v); }, precision);
  }
  // The load implied by w falls as w grows, so nu - load(w) increases.
  return bisect([&](double w) { return given - symmetric_load_rhs(cell, w, given); }, precision);
}

double symmetric_load_residual(const SymmetricTwoCell& cell, double power, double load) {
  return std::fabs(load - symmetric_load_rhs(cell, power, load));
}

double symmetric_power_residual(const SymmetricTwoCell& cell, double load, double power) {
  return std::fabs(power - power / load * symmetric_load_rhs(cell, power, load));
}

} // namespace loadcoupling::oracle
