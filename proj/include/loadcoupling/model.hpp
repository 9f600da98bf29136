#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace loadcoupling {

/// Raised for malformed inputs: dimension mismatches, negative vector entries,
/// models that fail validation.
class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a mapping is evaluated outside its domain (zero serving power
/// for the load map, zero target load for the power map).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

namespace detail {

void check_entries(std::span<const double> values, const char* what);

template <class Derived>
class StationVector {
public:
  StationVector() = default;
  explicit StationVector(std::vector<double> values) : values_(std::move(values)) {
    check_entries(values_, Derived::kName);
  }
  StationVector(std::initializer_list<double> values) : StationVector(std::vector<double>(values)) {}

  static Derived zeros(std::size_t size) { return Derived(std::vector<double>(size, 0.0)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }

  bool all_positive() const noexcept {
    for (double v : values_)
      if (!(v > 0.0))
        return false;
    return true;
  }

  bool operator==(const StationVector&) const = default;

private:
  std::vector<double> values_;
};

} // namespace detail

/// Per-station load: fraction of the K resource blocks in use. Entries are
/// non-negative and may exceed one.
class LoadVector : public detail::StationVector<LoadVector> {
public:
  static constexpr const char* kName = "load";
  using StationVector::StationVector;

  /// True when every station fits in its resource grid (all entries <= 1).
  bool is_operational() const noexcept {
    for (double v : values())
      if (v > 1.0)
        return false;
    return true;
  }
};

/// Per-station transmit power per resource block, in watts. Entries are
/// non-negative.
class PowerVector : public detail::StationVector<PowerVector> {
public:
  static constexpr const char* kName = "power";
  using StationVector::StationVector;
};

/// Raw scenario description. May be invalid; see validate().
///
/// Indices are 0-based here. Everything user-facing (file formats, messages)
/// is 1-based.
struct NetworkData {
  std::size_t num_stations = 0;
  std::size_t num_users = 0;
  std::vector<double> gains;          // row-major, num_stations x num_users, linear scale
  std::vector<double> demands;        // bit/s per user
  std::vector<std::size_t> serving;   // serving station of each user
  std::size_t num_rb = 0;             // K
  double rb_bandwidth = 0.0;          // B, Hz
  double noise_power = 0.0;           // sigma^2, W per resource block

  double gain(std::size_t station, std::size_t user) const { return gains[station * num_users + user]; }

  friend bool operator==(const NetworkData&, const NetworkData&) = default;
};

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string summary() const;
};

/// Checks every scenario invariant and reports each failure by field and
/// (1-based) index. Never throws.
ValidationResult validate(const NetworkData& data);

/// Immutable, validated network scenario.
class NetworkModel {
public:
  /// Throws ModelError listing every violation when `data` is invalid.
  explicit NetworkModel(NetworkData data);

  std::size_t num_stations() const noexcept { return data_.num_stations; }
  std::size_t num_users() const noexcept { return data_.num_users; }
  std::size_t num_rb() const noexcept { return data_.num_rb; }
  double rb_bandwidth() const noexcept { return data_.rb_bandwidth; }
  double noise_power() const noexcept { return data_.noise_power; }

  double gain(std::size_t station, std::size_t user) const { return data_.gain(station, user); }
  double demand(std::size_t user) const { return data_.demands[user]; }
  std::size_t serving(std::size_t user) const { return data_.serving[user]; }

  /// Users served by `station`, in increasing index order.
  std::span<const std::size_t> users_of(std::size_t station) const { return users_of_[station]; }

  const NetworkData& data() const noexcept { return data_; }

  friend bool operator==(const NetworkModel& a, const NetworkModel& b) { return a.data_ == b.data_; }

private:
  NetworkData data_;
  std::vector<std::vector<std::size_t>> users_of_;
};

inline ValidationResult validate(const NetworkModel& model) { return validate(model.data()); }

/// Total transmit power K * nu_i * p_i of every station, in watts.
std::vector<double> total_power(const NetworkModel& model, const LoadVector& load, const PowerVector& power);

} // namespace loadcoupling
