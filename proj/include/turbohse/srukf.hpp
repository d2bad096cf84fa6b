#pragma once

// Square-root unscented Kalman filter (van der Merwe form). The covariance is
// carried as a lower-triangular factor S with P = S S^T; every step works on
// S directly through QR and rank-one Cholesky updates.

#include "turbohse/common.hpp"
#include "turbohse/surrogate.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace turbohse::ukf {

using Map = std::function<Vec(const Vec&)>;

struct SigmaWeights {
  double lambda_u = 0.0;
  Vec wm;
  Vec wc;
};

/// Scaled unscented weights for dimension n. Throws NumericalError when
/// n + lambda is zero and UsageError when alpha^2 (n + kappa) <= 0.
SigmaWeights make_weights(int n, double alpha, double beta, double kappa);

/// Columns: mean, mean + gamma S_i (i = 1..n), mean - gamma S_i, gamma = sqrt(n + lambda).
Mat sigma_points(const Vec& mean, const Mat& sqrt_cov, double lambda_u);

/// Returns S' with S' S'^T = S S^T + sign u u^T. sign is +1 or -1; a
/// downdate that loses positive definiteness throws NumericalError.
Mat chol_update(const Mat& sqrt_cov, const Vec& u, int sign);

/// Lower-triangular L (nonnegative diagonal) with L L^T = M M^T.
Mat tria(const Mat& m);

struct SrUkfState {
  Vec mean;
  Mat sqrt_cov;  // lower triangular
  int t = 0;
};

/// Time update. An empty transition means identity.
SrUkfState predict(const SrUkfState& state, const SigmaWeights& w, const Vec& q_diag, const Map& transition = {});

/// Measurement update with observation map h and diagonal measurement noise.
SrUkfState update(const SrUkfState& state, const SigmaWeights& w, const Vec& y, const Map& h, const Vec& r_diag);

struct UkfConfig {
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 0.0;
  Vec q_diag = Vec::Constant(kNumHi, 1e-7);
  Vec r_diag;
  Vec x0 = Vec::Zero(kNumHi);
  Mat s0 = 1e-3 * Mat::Identity(kNumHi, kNumHi);
  /// Clamp each posterior mean to the indicator bounds.
  bool project_to_bounds = false;

  void validate(int measurement_dim) const;
};

/// R_jj = ((gamma Delta_j)^2 / 3) / 10, floored at 1e-12.
Vec build_r_from_noise(const Vec& delta, double gamma);

struct FilterResult {
  Mat estimates;  // L x 10
  Mat std_devs;   // L x 10, sqrt(diag(S S^T))
  bool ok = true;
  std::string failure;
};

/// Runs predict/update over every row of sensors (L x 7|ocs|), the
/// observation being the surrogate evaluated at each OC in order. Failures
/// (non-finite input, numerical breakdown) are reported, not thrown.
FilterResult filter_trajectory(const Mat& sensors, std::span<const OperatingCondition> ocs, const UkfConfig& cfg,
                               const SurrogateEngine& engine = SurrogateEngine());

}  // namespace turbohse::ukf
