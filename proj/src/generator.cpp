#include "turbohse/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace turbohse {

namespace {

constexpr int kHpcEff = 4;
constexpr int kHpcWc = 5;

DegradationSpeed draw_speed(Rng& rng, const std::array<double, 3>& probs) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (int s = 0; s < 2; ++s) {
    acc += probs[s];
    if (u < acc) return static_cast<DegradationSpeed>(s);
  }
  return DegradationSpeed::Fast;
}

std::uint64_t noise_seed(std::uint64_t base_seed, int id) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(id), 0x6e6f6973u};
  std::array<std::uint64_t, 1> out{};
  seq.generate(reinterpret_cast<std::uint32_t*>(out.data()), reinterpret_cast<std::uint32_t*>(out.data()) + 2);
  return out[0];
}

}  // namespace

SpeedPolicy SpeedPolicy::defaults() {
  SpeedPolicy p;
  for (int i = 0; i < kNumHi; ++i) p.probs[i] = {0.4, 0.45, 0.15};
  // the high-pressure compressor degrades faster than the rest
  p.probs[kHpcEff] = {0.2, 0.4, 0.4};
  p.probs[kHpcWc] = {0.2, 0.4, 0.4};
  p.change_period = 100;
  return p;
}

void GenerationConfig::validate() const {
  if (n_trajectories < 1) throw ConfigError("n_trajectories must be >= 1");
  if (max_len < 2) throw ConfigError("max_len must be >= 2");
  if (ocs.empty()) throw ConfigError("ocs must not be empty");
  for (std::size_t i = 0; i < ocs.size(); ++i) {
    for (std::size_t j = i + 1; j < ocs.size(); ++j) {
      if (ocs[i] == ocs[j]) throw ConfigError("ocs contains duplicates");
    }
  }
  for (const auto& sp : speed_params) {
    if (!(sp.mu <= 0.0) || !(sp.sigma >= 0.0)) throw ConfigError("speed_params need mu <= 0 and sigma >= 0");
  }
  if (!(std::abs(speed_params[0].mu) <= std::abs(speed_params[1].mu) &&
        std::abs(speed_params[1].mu) <= std::abs(speed_params[2].mu))) {
    throw ConfigError("speed_params must be ordered slow <= normal <= fast in |mu|");
  }
  for (int i = 0; i < kNumHi; ++i) {
    const auto& p = speed_policy.probs[i];
    if (p[0] < 0 || p[1] < 0 || p[2] < 0 || std::abs(p[0] + p[1] + p[2] - 1.0) > 1e-12) {
      throw ConfigError("speed_policy.probs for " + std::string(kHiNames[i]) + " must be a distribution");
    }
  }
  if (speed_policy.change_period < 1) throw ConfigError("speed_policy.change_period must be >= 1");
  if (maintenance) {
    const auto [lo, hi] = maint_interval;
    if (lo < 1 || hi < lo) throw ConfigError("maint_interval must satisfy 1 <= min <= max");
  }
  if (!(jitter_sigma >= 0.0)) throw ConfigError("jitter_sigma must be >= 0");
  if (!(noise.gamma >= 0.0)) throw ConfigError("noise.gamma must be >= 0");
  if (!(noise.baseline_fraction > 0.0)) throw ConfigError("noise.baseline_fraction must be > 0");
}

Mat Trajectory::states_matrix() const {
  Mat out(length(), kNumHi);
  for (int t = 0; t < length(); ++t) out.row(t) = states[t].values.transpose();
  return out;
}

Mat Trajectory::stacked_sensors(bool noisy, std::span<const OperatingCondition> which) const {
  const auto& src = noisy ? sensors_noisy : sensors_clean;
  Mat out(length(), kNumChannels * static_cast<Eigen::Index>(which.size()));
  for (std::size_t k = 0; k < which.size(); ++k) {
    const auto it = src.find(which[k]);
    if (it == src.end()) {
      throw UsageError("trajectory " + std::to_string(id) + " has no sensors for " + std::string(to_string(which[k])));
    }
    out.middleCols<kNumChannels>(kNumChannels * static_cast<Eigen::Index>(k)) = it->second;
  }
  return out;
}

bool Trajectory::is_maintenance_step(int t) const {
  return std::any_of(maintenance.begin(), maintenance.end(), [t](const MaintenanceEvent& e) { return e.t == t; });
}

HealthState apply_maintenance(const HealthState& x, const std::array<double, kNumHi>& lambdas) {
  HealthState out;
  for (int i = 0; i < kNumHi; ++i) {
    if (!(lambdas[i] >= 0.0 && lambdas[i] <= 1.0)) {
      throw UsageError("maintenance fraction outside [0, 1]: " + std::to_string(lambdas[i]));
    }
    out[i] = (1.0 - lambdas[i]) * x[i];
  }
  return out;
}

std::vector<int> sample_maintenance_schedule(Rng& rng, int horizon, std::pair<int, int> interval) {
  std::uniform_int_distribution<int> gap(interval.first, interval.second);
  std::vector<int> times;
  int t = 0;
  while (true) {
    t += gap(rng);
    if (t >= horizon) break;
    times.push_back(t);
  }
  return times;
}

ClipResult clip_to_bounds(const HealthState& x) {
  ClipResult r{x, false};
  const auto& b = hi_bounds();
  for (int i = 0; i < kNumHi; ++i) {
    if (x[i] < b[i].lower) {
      r.state[i] = b[i].lower;
      r.violated = true;
    } else if (x[i] > b[i].upper) {
      r.state[i] = b[i].upper;
      r.violated = true;
    }
  }
  return r;
}

Trajectory generate_trajectory(const GenerationConfig& cfg, int id, const SurrogateEngine& engine) {
  cfg.validate();
  Rng rng(cfg.base_seed + static_cast<std::uint64_t>(id));
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> lambda_dist(0.6, 0.8);

  Trajectory traj;
  traj.id = id;
  traj.ocs = cfg.ocs;

  std::vector<int> schedule;
  if (cfg.maintenance) schedule = sample_maintenance_schedule(rng, cfg.max_len, cfg.maint_interval);
  std::size_t next_event = 0;

  std::array<DegradationSpeed, kNumHi> speed{};
  for (int i = 0; i < kNumHi; ++i) speed[i] = draw_speed(rng, cfg.speed_policy.probs[i]);

  traj.states.reserve(static_cast<std::size_t>(cfg.max_len));
  traj.states.push_back(HealthState::zero());
  traj.speeds.push_back(speed);

  for (int t = 1; t < cfg.max_len; ++t) {
    HealthState x = traj.states.back();
    if (next_event < schedule.size() && schedule[next_event] == t) {
      MaintenanceEvent ev;
      ev.t = t;
      for (double& l : ev.lambdas) l = lambda_dist(rng);
      x = apply_maintenance(x, ev.lambdas);
      traj.maintenance.push_back(ev);
      ++next_event;
    }
    if (t % cfg.speed_policy.change_period == 0) {
      for (int i = 0; i < kNumHi; ++i) speed[i] = draw_speed(rng, cfg.speed_policy.probs[i]);
    }
    for (int i = 0; i < kNumHi; ++i) {
      const SpeedParams& sp = cfg.speed_params[static_cast<int>(speed[i])];
      const double slope = sp.mu + sp.sigma * std_normal(rng);
      const double jitter = cfg.jitter_sigma * std_normal(rng);
      x[i] += slope + jitter;
    }
    const ClipResult clipped = clip_to_bounds(x);
    traj.states.push_back(clipped.state);
    traj.speeds.push_back(speed);
    if (clipped.violated) {
      traj.terminated_early = true;
      break;
    }
  }

  const int len = traj.length();
  for (OperatingCondition oc : cfg.ocs) {
    Mat frames(len, kNumChannels);
    for (int t = 0; t < len; ++t) frames.row(t) = engine.simulate_sensors(traj.states[t], oc).channels.transpose();
    traj.sensors_clean.emplace(oc, std::move(frames));
  }
  return traj;
}

Eigen::Matrix<double, kNumChannels, 1> compute_channel_ranges(std::span<const Trajectory> trajectories,
                                                              OperatingCondition oc, const SurrogateEngine& engine) {
  if (trajectories.empty()) throw UsageError("channel ranges need at least one trajectory");
  Eigen::Matrix<double, kNumChannels, 1> lo = Eigen::Matrix<double, kNumChannels, 1>::Constant(INFINITY);
  Eigen::Matrix<double, kNumChannels, 1> hi = Eigen::Matrix<double, kNumChannels, 1>::Constant(-INFINITY);
  bool any = false;
  for (const auto& traj : trajectories) {
    const auto it = traj.sensors_clean.find(oc);
    if (it == traj.sensors_clean.end() || it->second.rows() == 0) continue;
    lo = lo.cwiseMin(it->second.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(it->second.colwise().maxCoeff().transpose());
    any = true;
  }
  if (!any) throw UsageError("no clean frames at " + std::string(to_string(oc)));
  Eigen::Matrix<double, kNumChannels, 1> delta = hi - lo;
  for (int j = 0; j < kNumChannels; ++j) {
    if (delta[j] == 0.0) delta[j] = 0.01 * std::abs(engine.baseline(oc)[j]);
  }
  return delta;
}

SensorFrame add_sensor_noise(const SensorFrame& y, const Eigen::Matrix<double, kNumChannels, 1>& delta, double gamma,
                             Rng& rng) {
  SensorFrame out = y;
  out.noised = true;
  if (gamma == 0.0) return out;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int j = 0; j < kNumChannels; ++j) out.channels[j] += gamma * delta[j] * unit(rng);
  return out;
}

Dataset generate_dataset(const GenerationConfig& cfg, const SurrogateEngine& engine) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  ds.trajectories.resize(static_cast<std::size_t>(cfg.n_trajectories));
  parallel_for(ds.trajectories.size(), [&](std::size_t i) {
    ds.trajectories[i] = generate_trajectory(cfg, static_cast<int>(i), engine);
  });

  for (OperatingCondition oc : cfg.ocs) {
    if (cfg.noise.range_mode == RangeMode::DatasetRange) {
      ds.deltas[oc] = compute_channel_ranges(ds.trajectories, oc, engine);
    } else {
      ds.deltas[oc] = cfg.noise.baseline_fraction * engine.baseline(oc).cwiseAbs();
    }
  }

  parallel_for(ds.trajectories.size(), [&](std::size_t i) {
    Trajectory& traj = ds.trajectories[i];
    Rng rng(noise_seed(cfg.base_seed, traj.id));
    for (OperatingCondition oc : cfg.ocs) {
      const Mat& clean = traj.sensors_clean.at(oc);
      Mat noisy(clean.rows(), clean.cols());
      for (Eigen::Index t = 0; t < clean.rows(); ++t) {
        const SensorFrame frame{clean.row(t).transpose(), oc, false};
        noisy.row(t) = add_sensor_noise(frame, ds.deltas.at(oc), cfg.noise.gamma, rng).channels.transpose();
      }
      traj.sensors_noisy.emplace(oc, std::move(noisy));
    }
  });
  return ds;
}

}  // namespace turbohse
