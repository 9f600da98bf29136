#include "loadcoupling/model.hpp"

#include <cmath>
#include <sstream>

namespace loadcoupling {

namespace detail {

void check_entries(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      std::ostringstream os;
      os << what << "[" << i + 1 << "] = " << values[i] << " is not a finite non-negative value";
      throw ModelError(os.str());
    }
  }
}

} // namespace detail

std::string ValidationResult::summary() const {
  if (ok())
    return "OK";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i)
      os << "; ";
    os << violations[i].message;
  }
  return os.str();
}

ValidationResult validate(const NetworkData& data) {
  ValidationResult result;
  auto add = [&](std::string field, std::string message) {
    result.violations.push_back({std::move(field), std::move(message)});
  };
  const std::size_t M = data.num_stations;
  const std::size_t N = data.num_users;

  if (M == 0)
    add("num_stations", "num_stations must be positive");
  if (N == 0)
    add("num_users", "num_users must be positive");
  if (data.num_rb == 0)
    add("num_rb", "num_rb must be positive");
  if (!(data.rb_bandwidth > 0.0) || !std::isfinite(data.rb_bandwidth))
    add("rb_bandwidth", "rb_bandwidth not > 0");
  if (!(data.noise_power > 0.0) || !std::isfinite(data.noise_power))
    add("noise_power", "noise_power not > 0");

  if (data.gains.size() != M * N) {
    add("gains", "gains has " + std::to_string(data.gains.size()) + " entries, expected " + std::to_string(M * N));
  } else {
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        const double g = data.gain(i, j);
        if (!(g > 0.0) || !std::isfinite(g))
          add("gains", "gains[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "] not > 0");
      }
  }

  if (data.demands.size() != N) {
    add("demands", "demands has " + std::to_string(data.demands.size()) + " entries, expected " + std::to_string(N));
  } else {
    for (std::size_t j = 0; j < N; ++j)
      if (!(data.demands[j] > 0.0) || !std::isfinite(data.demands[j]))
        add("demands", "demands[" + std::to_string(j + 1) + "] not > 0");
  }

  if (data.serving.size() != N) {
    add("serving", "serving has " + std::to_string(data.serving.size()) + " entries, expected " + std::to_string(N));
  } else {
    std::vector<bool> has_user(M, false);
    for (std::size_t j = 0; j < N; ++j) {
      if (data.serving[j] >= M)
        add("serving", "serving[" + std::to_string(j + 1) + "] = " + std::to_string(data.serving[j] + 1) +
                           " outside [1, " + std::to_string(M) + "]");
      else
        has_user[data.serving[j]] = true;
    }
    for (std::size_t i = 0; i < M; ++i)
      if (!has_user[i])
        add("serving", "station " + std::to_string(i + 1) + " serves no user");
  }
  return result;
}

NetworkModel::NetworkModel(NetworkData data) : data_(std::move(data)) {
  const ValidationResult check = validate(data_);
  if (!check.ok())
    throw ModelError("invalid network model: " + check.summary());
  users_of_.resize(data_.num_stations);
  for (std::size_t j = 0; j < data_.num_users; ++j)
    users_of_[data_.serving[j]].push_back(j);
}

std::vector<double> total_power(const NetworkModel& model, const LoadVector& load, const PowerVector& power) {
  const std::size_t M = model.num_stations();
  if (load.size() != M || power.size() != M)
    throw ModelError("total_power: expected vectors of length " + std::to_string(M) + ", got load " +
                     std::to_string(load.size()) + " and power " + std::to_string(power.size()));
  std::vector<double> out(M);
  const double K = static_cast<double>(model.num_rb());
  for (std::size_t i = 0; i < M; ++i)
    out[i] = K * load[i] * power[i];
  return out;
}

} // namespace loadcoupling
