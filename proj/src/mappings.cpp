#include "loadcoupling/mappings.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>

namespace loadcoupling {

namespace {

// Neumaier-compensated accumulator in extended precision.
class CompensatedSum {
public:
  void add(long double x) {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  long double value() const { return sum_ + carry_; }

private:
  long double sum_ = 0.0L;
  long double carry_ = 0.0L;
};

// Stations below this count are evaluated on the calling thread.
constexpr std::size_t kParallelStationThreshold = 16;

template <class Fn>
void for_each_station(std::size_t num_stations, ExecutionOptions exec, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(exec.max_threads == 0 ? 1 : exec.max_threads, num_stations);
  if (workers <= 1 || num_stations < kParallelStationThreshold) {
    for (std::size_t i = 0; i < num_stations; ++i)
      fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (num_stations + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(num_stations, begin + chunk);
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i)
        fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(chunk, num_stations); ++i)
    fn(i);
}

void check_length(const NetworkModel& model, std::size_t size, const char* what) {
  if (size != model.num_stations())
    throw ModelError(std::string(what) + " has " + std::to_string(size) + " entries, expected " +
                     std::to_string(model.num_stations()));
}

// sum_{k != station} nu_k p_k g_kj + sigma^2
long double interference_plus_noise(const NetworkModel& model, const LoadVector& load, const PowerVector& power,
                                    std::size_t station, std::size_t user) {
  CompensatedSum sum;
  for (std::size_t k = 0; k < model.num_stations(); ++k) {
    if (k == station)
      continue;
    sum.add(static_cast<long double>(load[k]) * power[k] * model.gain(k, user));
  }
  sum.add(model.noise_power());
  return sum.value();
}

// d_j / (K omega_ij) = d_j ln2 / (K B log1p(p_i g_ij / I_j)), the addend of
// the load map.
long double load_term(const NetworkModel& model, const LoadVector& load, const PowerVector& power,
                      std::size_t station, std::size_t user) {
  const long double sinr =
      static_cast<long double>(power[station]) * model.gain(station, user) /
      interference_plus_noise(model, load, power, station, user);
  const long double K = static_cast<long double>(model.num_rb());
  return static_cast<long double>(model.demand(user)) * kLn2 /
         (K * model.rb_bandwidth() * std::log1p(sinr));
}

MappingEval make_eval(const NetworkModel& model, Diagnostics diagnostics) {
  MappingEval eval;
  eval.output.resize(model.num_stations());
  if (diagnostics == Diagnostics::PerUserTerms) {
    eval.terms.resize(model.num_stations());
    for (std::size_t i = 0; i < model.num_stations(); ++i)
      eval.terms[i].resize(model.users_of(i).size());
  }
  return eval;
}

} // namespace

ExecutionOptions ExecutionOptions::from_environment() {
  ExecutionOptions exec;
  exec.max_threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LOADPOWER_MAX_THREADS")) {
    const std::string_view text(env);
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size() && value > 0)
      exec.max_threads = value;
  }
  return exec;
}

double rate_per_rb(const NetworkModel& model, const LoadVector& load, const PowerVector& power,
                   std::size_t station, std::size_t user) {
  check_length(model, load.size(), "load");
  check_length(model, power.size(), "power");
  if (station >= model.num_stations() || user >= model.num_users())
    throw ModelError("rate_per_rb: station or user index out of range");
  if (!(power[station] > 0.0))
    throw DomainError("zero serving power at station " + std::to_string(station + 1));
  const long double sinr = static_cast<long double>(power[station]) * model.gain(station, user) /
                           interference_plus_noise(model, load, power, station, user);
  return static_cast<double>(model.rb_bandwidth() * std::log1p(sinr) / kLn2);
}

MappingEval load_map(const NetworkModel& model, const PowerVector& power, const LoadVector& load,
                     Diagnostics diagnostics, ExecutionOptions exec) {
  check_length(model, power.size(), "power");
  check_length(model, load.size(), "load");
  for (std::size_t i = 0; i < power.size(); ++i)
    if (!(power[i] > 0.0))
      throw DomainError("load map undefined at zero power: zero serving power at station " + std::to_string(i + 1));

  MappingEval eval = make_eval(model, diagnostics);
  for_each_station(model.num_stations(), exec, [&](std::size_t i) {
    CompensatedSum sum;
    const auto users = model.users_of(i);
    for (std::size_t k = 0; k < users.size(); ++k) {
      const long double term = load_term(model, load, power, i, users[k]);
      sum.add(term);
      if (!eval.terms.empty())
        eval.terms[i][k] = static_cast<double>(term);
    }
    eval.output[i] = static_cast<double>(sum.value());
  });
  return eval;
}

MappingEval power_map(const NetworkModel& model, const LoadVector& load, const PowerVector& power,
                      Diagnostics diagnostics, ExecutionOptions exec) {
  check_length(model, load.size(), "load");
  check_length(model, power.size(), "power");
  for (std::size_t i = 0; i < load.size(); ++i)
    if (!(load[i] > 0.0))
      throw DomainError("power map requires strictly positive target load: load[" + std::to_string(i + 1) +
                        "] = " + std::to_string(load[i]));

  const long double K = static_cast<long double>(model.num_rb());
  const long double B = model.rb_bandwidth();
  MappingEval eval = make_eval(model, diagnostics);
  for_each_station(model.num_stations(), exec, [&](std::size_t i) {
    CompensatedSum sum;
    const auto users = model.users_of(i);
    const long double nu = load[i];
    const long double p = power[i];
    for (std::size_t k = 0; k < users.size(); ++k) {
      const std::size_t j = users[k];
      const long double interference = interference_plus_noise(model, load, power, i, j);
      long double term;
      if (p != 0.0L) {
        const long double sinr = p * model.gain(i, j) / interference;
        term = (p / nu) * model.demand(j) * kLn2 / (K * B * std::log1p(sinr));
      } else {
        term = model.demand(j) * kLn2 / (K * B * model.gain(i, j) * nu) * interference;
      }
      sum.add(term);
      if (!eval.terms.empty())
        eval.terms[i][k] = static_cast<double>(term);
    }
    eval.output[i] = static_cast<double>(sum.value());
  });
  return eval;
}

double rate_growth(double x) {
  const long double v = x;
  return static_cast<double>(v * std::log1p(1.0L / v));
}

} // namespace loadcoupling
