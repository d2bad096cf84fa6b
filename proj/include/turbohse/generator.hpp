#pragma once

// Seeded generation of degradation trajectories: per-indicator speed regimes,
// maintenance recovery, bound clipping with early termination, and bounded
// uniform sensor noise scaled by dataset channel ranges.

#include "turbohse/common.hpp"
#include "turbohse/surrogate.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace turbohse {

using Rng = std::mt19937_64;

enum class DegradationSpeed : std::uint8_t { Slow = 0, Normal = 1, Fast = 2 };

struct SpeedParams {
  double mu;     // per-step mean slope
  double sigma;  // per-step slope std
};

struct SpeedPolicy {
  /// probs[i] = (P(slow), P(normal), P(fast)) for indicator i.
  std::array<std::array<double, 3>, kNumHi> probs;
  int change_period = 100;

  static SpeedPolicy defaults();
};

struct MaintenanceEvent {
  int t = 0;
  std::array<double, kNumHi> lambdas{};
};

enum class RangeMode { DatasetRange, FixedFractionOfBaseline };

struct NoiseConfig {
  double gamma = 0.02;
  RangeMode range_mode = RangeMode::DatasetRange;
  /// Delta = fraction * |b| when range_mode is FixedFractionOfBaseline.
  double baseline_fraction = 0.05;
};

struct GenerationConfig {
  int n_trajectories = 50;
  int max_len = 1000;
  std::vector<OperatingCondition> ocs{kAllOcs.begin(), kAllOcs.end()};
  std::array<SpeedParams, 3> speed_params{{{-5e-6, 2.5e-6}, {-2e-5, 1e-5}, {-5e-5, 2.5e-5}}};
  SpeedPolicy speed_policy = SpeedPolicy::defaults();
  bool maintenance = true;
  std::pair<int, int> maint_interval{200, 500};
  double jitter_sigma = 2e-6;
  std::uint64_t base_seed = 42;
  NoiseConfig noise;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct Trajectory {
  int id = 0;
  std::vector<OperatingCondition> ocs;
  std::vector<HealthState> states;
  std::vector<std::array<DegradationSpeed, kNumHi>> speeds;
  std::vector<MaintenanceEvent> maintenance;
  std::map<OperatingCondition, Mat> sensors_clean;  // L x 7 per OC
  std::map<OperatingCondition, Mat> sensors_noisy;
  bool terminated_early = false;

  int length() const { return static_cast<int>(states.size()); }
  /// L x 10 matrix of states.
  Mat states_matrix() const;
  /// L x (7 * |ocs|) matrix of sensors, OCs concatenated in `ocs` order.
  Mat stacked_sensors(bool noisy, std::span<const OperatingCondition> ocs) const;
  bool is_maintenance_step(int t) const;
};

struct Dataset {
  GenerationConfig config;
  std::vector<Trajectory> trajectories;
  std::map<OperatingCondition, Eigen::Matrix<double, kNumChannels, 1>> deltas;
};

/// x'_i = (1 - lambda_i) x_i. Throws UsageError if any lambda is outside [0, 1].
HealthState apply_maintenance(const HealthState& x, const std::array<double, kNumHi>& lambdas);

/// Increasing event times with gaps drawn uniformly from interval; all < horizon.
std::vector<int> sample_maintenance_schedule(Rng& rng, int horizon, std::pair<int, int> interval);

struct ClipResult {
  HealthState state;
  bool violated = false;
};
ClipResult clip_to_bounds(const HealthState& x);

Trajectory generate_trajectory(const GenerationConfig& cfg, int id,
                               const SurrogateEngine& engine = SurrogateEngine());

/// Per-channel max - min of clean frames at oc over all trajectories, with
/// 0.01 |b_j| substituted for degenerate channels.
Eigen::Matrix<double, kNumChannels, 1> compute_channel_ranges(std::span<const Trajectory> trajectories,
                                                              OperatingCondition oc,
                                                              const SurrogateEngine& engine = SurrogateEngine());

SensorFrame add_sensor_noise(const SensorFrame& y, const Eigen::Matrix<double, kNumChannels, 1>& delta,
                             double gamma, Rng& rng);

Dataset generate_dataset(const GenerationConfig& cfg, const SurrogateEngine& engine = SurrogateEngine());

}  // namespace turbohse
