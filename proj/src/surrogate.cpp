#include "turbohse/surrogate.hpp"

#include <cmath>
#include <sstream>

namespace turbohse {

namespace {

constexpr std::array<std::string_view, kNumOc> kOcNames = {"Cruise", "Takeoff", "Climb1", "Climb2"};

SurrogateConstants make_shipped() {
  SurrogateConstants c;
  // rows: sensors in SensorFrame order; cols: indicators in HealthState order
  c.a1 << -0.8, 0.6, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0, 0.1, 0.1,  //
      0.0, 0.1, -0.2, 0.2, -0.9, 0.7, -0.3, 0.2, 0.0, 0.1,     //
      0.1, 0.3, 0.2, 0.5, 0.4, -0.8, 0.1, -0.2, 0.0, 0.1,      //
      0.2, 0.0, 0.1, 0.0, -1.0, 0.3, -0.5, 0.1, -0.1, 0.0,     //
      -0.5, 0.2, -0.3, 0.1, -0.7, 0.2, -0.6, 0.2, -0.3, 0.1,   //
      0.1, 0.0, 0.0, 0.1, -0.4, 0.1, -0.9, 0.3, -0.2, 0.1,     //
      0.2, -0.1, 0.1, 0.2, 0.1, -0.1, 0.2, -0.5, -0.25, 0.15;
  c.shift_mix = {0.0, 0.5, 0.2, 0.35};
  c.baselines[0] << 3200, 9500, 1400, 750, 0.9, 1050, 180;
  c.baselines[1] << 4200, 11500, 2600, 950, 2.4, 1350, 320;
  c.baselines[2] << 3800, 10800, 2100, 880, 1.8, 1250, 270;
  c.baselines[3] << 3600, 10200, 1800, 820, 1.3, 1150, 230;
  c.kappa_nl = 4.0;
  return c;
}

}  // namespace

std::string_view to_string(OperatingCondition oc) { return kOcNames[static_cast<int>(oc)]; }

std::optional<OperatingCondition> parse_oc(std::string_view name) {
  for (int i = 0; i < kNumOc; ++i) {
    if (kOcNames[i] == name) return static_cast<OperatingCondition>(i);
  }
  return std::nullopt;
}

const std::array<HiBounds, kNumHi>& hi_bounds() {
  static const std::array<HiBounds, kNumHi> bounds = {{{-0.05, 0.0},
                                                       {-0.05, 0.03},
                                                       {-0.05, 0.0},
                                                       {-0.05, 0.03},
                                                       {-0.05, 0.0},
                                                       {-0.05, 0.03},
                                                       {-0.05, 0.0},
                                                       {-0.05, 0.05},
                                                       {-0.05, 0.0},
                                                       {-0.05, 0.05}}};
  return bounds;
}

HealthState HealthState::from(const Vec& v) {
  if (v.size() != kNumHi) throw UsageError("health state needs 10 values");
  HealthState s;
  s.values = v;
  return s;
}

bool HealthState::within_bounds(double tol) const {
  const auto& b = hi_bounds();
  for (int i = 0; i < kNumHi; ++i) {
    if (!(values[i] >= b[i].lower - tol && values[i] <= b[i].upper + tol)) return false;
  }
  return true;
}

const SurrogateConstants& SurrogateConstants::shipped() {
  static const SurrogateConstants c = make_shipped();
  return c;
}

SurrogateEngine::SurrogateEngine(const SurrogateConstants& constants) : constants_(constants) {
  for (int k = 0; k < kNumOc; ++k) {
    Eigen::Matrix<double, kNumHi, kNumHi> shift = Eigen::Matrix<double, kNumHi, kNumHi>::Zero();
    // column i of A*S is column i+1 of A (cyclic)
    for (int i = 0; i < kNumHi; ++i) shift((i + 1) % kNumHi, i) = 1.0;
    sensitivity_[k] = constants_.a1 *
                      (Eigen::Matrix<double, kNumHi, kNumHi>::Identity() + constants_.shift_mix[k] * shift);
  }
}

Eigen::Matrix<double, kNumChannels, 1> SurrogateEngine::evaluate(const Vec& x, OperatingCondition oc) const {
  const Eigen::Matrix<double, kNumChannels, 1> u = sensitivity_matrix(oc) * x;
  const auto& b = baseline(oc);
  return b.array() * (1.0 + u.array() + constants_.kappa_nl * u.array().square());
}

SensorFrame SurrogateEngine::simulate_sensors(const HealthState& x, OperatingCondition oc) const {
  if (!x.within_bounds()) {
    std::ostringstream msg;
    msg << "health state outside bounds:";
    const auto& b = hi_bounds();
    for (int i = 0; i < kNumHi; ++i) {
      if (!(x[i] >= b[i].lower && x[i] <= b[i].upper)) msg << ' ' << kHiNames[i] << '=' << x[i];
    }
    throw BoundsError(msg.str());
  }
  return {evaluate(x.values, oc), oc, false};
}

Eigen::Matrix<double, kNumChannels, kNumHi> SurrogateEngine::observation_jacobian(
    const HealthState& x, OperatingCondition oc) const {
  const auto& a = sensitivity_matrix(oc);
  const Eigen::Matrix<double, kNumChannels, 1> u = a * x.values;
  const Eigen::Matrix<double, kNumChannels, 1> scale =
      baseline(oc).array() * (1.0 + 2.0 * constants_.kappa_nl * u.array());
  return scale.asDiagonal() * a;
}

Vec SurrogateEngine::evaluate_stacked(const Vec& x, std::span<const OperatingCondition> ocs) const {
  Vec out(kNumChannels * static_cast<Eigen::Index>(ocs.size()));
  for (std::size_t k = 0; k < ocs.size(); ++k) {
    out.segment<kNumChannels>(kNumChannels * static_cast<Eigen::Index>(k)) = evaluate(x, ocs[k]);
  }
  return out;
}

Mat SurrogateEngine::stacked_sensitivity() const {
  Mat out(kNumChannels * kNumOc, kNumHi);
  for (int k = 0; k < kNumOc; ++k) out.middleRows<kNumChannels>(kNumChannels * k) = sensitivity_[k];
  return out;
}

Vec column_singular_values(const Mat& a, std::span<const int> columns) {
  Mat sub(a.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = a.col(columns[j]);
  return Eigen::JacobiSVD<Mat>(sub).singularValues();
}

}  // namespace turbohse
