#pragma once

// Closed-form surrogate engine: sensors y = b(oc) * (1 + u + kappa * u^2)
// with u = A(oc) * x. Columns for the low-pressure turbine indicators are
// deliberately small so those indicators are weakly observable.

#include "turbohse/common.hpp"

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace turbohse {

enum class OperatingCondition { Cruise = 0, Takeoff = 1, Climb1 = 2, Climb2 = 3 };

inline constexpr std::array<OperatingCondition, kNumOc> kAllOcs = {
    OperatingCondition::Cruise, OperatingCondition::Takeoff, OperatingCondition::Climb1,
    OperatingCondition::Climb2};

std::string_view to_string(OperatingCondition oc);
std::optional<OperatingCondition> parse_oc(std::string_view name);

/// Per-indicator admissible interval.
struct HiBounds {
  double lower;
  double upper;
};

/// Efficiencies in [-0.05, 0], compressor mass flows in [-0.05, 0.03],
/// turbine mass flows in [-0.05, 0.05].
const std::array<HiBounds, kNumHi>& hi_bounds();

/// 10-dimensional health indicator vector; zero is full health.
struct HealthState {
  Eigen::Matrix<double, kNumHi, 1> values = Eigen::Matrix<double, kNumHi, 1>::Zero();

  static HealthState zero() { return {}; }
  static HealthState from(const Vec& v);
  bool within_bounds(double tol = 0.0) const;
  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
};

struct SensorFrame {
  Eigen::Matrix<double, kNumChannels, 1> channels;
  OperatingCondition oc = OperatingCondition::Cruise;
  bool noised = false;
};

struct SurrogateConstants {
  Eigen::Matrix<double, kNumChannels, kNumHi> a1;
  std::array<double, kNumOc> shift_mix;
  std::array<Eigen::Matrix<double, kNumChannels, 1>, kNumOc> baselines;
  double kappa_nl;

  /// The constants compiled into this build.
  static const SurrogateConstants& shipped();
};

class SurrogateEngine {
 public:
  explicit SurrogateEngine(const SurrogateConstants& constants = SurrogateConstants::shipped());

  const SurrogateConstants& constants() const { return constants_; }

  /// A(oc) = A1 (I + c(oc) S), S the cyclic column shift.
  const Eigen::Matrix<double, kNumChannels, kNumHi>& sensitivity_matrix(OperatingCondition oc) const {
    return sensitivity_[static_cast<int>(oc)];
  }
  const Eigen::Matrix<double, kNumChannels, 1>& baseline(OperatingCondition oc) const {
    return constants_.baselines[static_cast<int>(oc)];
  }

  /// Throws BoundsError when x leaves the admissible box.
  SensorFrame simulate_sensors(const HealthState& x, OperatingCondition oc) const;

  /// Same formula without the bounds check; used by the filter, whose sigma
  /// points legitimately wander outside the box.
  Eigen::Matrix<double, kNumChannels, 1> evaluate(const Vec& x, OperatingCondition oc) const;

  Eigen::Matrix<double, kNumChannels, kNumHi> observation_jacobian(const HealthState& x,
                                                                   OperatingCondition oc) const;

  /// Sensors for the given OCs concatenated in order (7 * ocs.size() values).
  Vec evaluate_stacked(const Vec& x, std::span<const OperatingCondition> ocs) const;

  /// Sensitivity matrices stacked row-wise over all four OCs (28 x 10).
  Mat stacked_sensitivity() const;

 private:
  SurrogateConstants constants_;
  std::array<Eigen::Matrix<double, kNumChannels, kNumHi>, kNumOc> sensitivity_;
};

/// Singular values (descending) of the given columns of A1.
Vec column_singular_values(const Mat& a, std::span<const int> columns);

}  // namespace turbohse
