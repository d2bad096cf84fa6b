#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace turbohse {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Number of health indicators.
inline constexpr int kNumHi = 10;
/// Sensor channels per operating condition.
inline constexpr int kNumChannels = 7;
inline constexpr int kNumOc = 4;

// Error taxonomy. Everything derives from Error so the CLI can map any failure
// to a nonzero exit with a readable message.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BoundsError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct UsageError : Error {
  using Error::Error;
};
struct MetricUndefined : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

/// Full indicator names, in HealthState index order.
inline constexpr std::array<std::string_view, kNumHi> kHiNames = {
    "deg_CmpFan_s_mapEff_in", "deg_CmpFan_s_mapWc_in", "deg_CmpBst_s_mapEff_in",
    "deg_CmpBst_s_mapWc_in",  "deg_CmpH_s_mapEff_in",  "deg_CmpH_s_mapWc_in",
    "deg_TrbH_s_mapEff_in",   "deg_TrbH_s_mapWc_in",   "deg_TrbL_s_mapEff_in",
    "deg_TrbL_s_mapWc_in"};

inline constexpr std::array<std::string_view, kNumChannels> kChannelNames = {
    "LP_Nmech", "HP_Nmech", "HPC_Pout_st", "HP_Tout", "Fuel_flow", "LPT_Tin", "LPT_Pout"};

/// Index of the indicator with the given full name, or -1.
int hi_index(std::string_view name);

/// Worker count: TURBOHSE_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. The first
/// exception thrown by any worker is rethrown on the caller after all join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace turbohse
