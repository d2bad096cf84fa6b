#include "turbohse/srukf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace turbohse::ukf {

SigmaWeights make_weights(int n, double alpha, double beta, double kappa) {
  if (n < 1) throw UsageError("state dimension must be positive");
  const double scale = alpha * alpha * (n + kappa);
  if (!(scale > 0.0)) throw UsageError("alpha^2 (n + kappa) must be positive");
  SigmaWeights w;
  w.lambda_u = scale - n;
  const double denom = n + w.lambda_u;
  if (denom == 0.0) throw NumericalError("degenerate sigma-point scaling: n + lambda = 0");
  w.wm = Vec::Constant(2 * n + 1, 1.0 / (2.0 * denom));
  w.wc = w.wm;
  w.wm[0] = w.lambda_u / denom;
  w.wc[0] = w.wm[0] + (1.0 - alpha * alpha + beta);
  return w;
}

Mat sigma_points(const Vec& mean, const Mat& sqrt_cov, double lambda_u) {
  const Eigen::Index n = mean.size();
  const double gamma = std::sqrt(static_cast<double>(n) + lambda_u);
  Mat pts(n, 2 * n + 1);
  pts.col(0) = mean;
  for (Eigen::Index i = 0; i < n; ++i) {
    pts.col(1 + i) = mean + gamma * sqrt_cov.col(i);
    pts.col(1 + n + i) = mean - gamma * sqrt_cov.col(i);
  }
  return pts;
}

Mat chol_update(const Mat& sqrt_cov, const Vec& u, int sign) {
  if (sign != 1 && sign != -1) throw UsageError("chol_update sign must be +1 or -1");
  Mat l = sqrt_cov;
  Vec x = u;
  const Eigen::Index n = l.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lkk = l(k, k);
    const double xk = x[k];
    if (xk == 0.0) continue;
    if (sign > 0) {
      // Givens rotation of (L_:k, x)
      const double r = std::hypot(lkk, xk);
      const double c = lkk / r;
      const double s = xk / r;
      l(k, k) = r;
      for (Eigen::Index i = k + 1; i < n; ++i) {
        const double lik = l(i, k);
        l(i, k) = c * lik + s * x[i];
        x[i] = c * x[i] - s * lik;
      }
    } else {
      // hyperbolic rotation
      const double r2 = (lkk - xk) * (lkk + xk);
      if (!(r2 > 0.0)) {
        std::ostringstream msg;
        msg << "Cholesky downdate lost positive definiteness at pivot " << k << " (L_kk=" << lkk << ", u_k=" << xk
            << ")";
        throw NumericalError(msg.str());
      }
      const double r = std::sqrt(r2);
      const double c = r / lkk;
      const double s = xk / lkk;
      l(k, k) = r;
      for (Eigen::Index i = k + 1; i < n; ++i) {
        l(i, k) = (l(i, k) - s * x[i]) / c;
        x[i] = c * x[i] - s * l(i, k);
      }
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (l(k, k) < 0.0) l.col(k) *= -1.0;
  }
  return l;
}

Mat tria(const Mat& m) {
  const Eigen::Index n = m.rows();
  Mat mt = m.transpose();
  Eigen::HouseholderQR<Mat> qr(mt);
  Mat r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  Mat l = r.transpose();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (l(k, k) < 0.0) l.col(k) *= -1.0;
  }
  return l;
}

namespace {

// Lower-triangular factor of sum_i wc_i d_i d_i^T + diag(noise), given the
// deviation columns d_i = pts_i - mean.
Mat sqrt_covariance(const Mat& deviations, const SigmaWeights& w, const Vec& noise_diag) {
  const Eigen::Index dim = deviations.rows();
  const Eigen::Index count = deviations.cols() - 1;
  Mat compound(dim, count + dim);
  compound.leftCols(count) = std::sqrt(w.wc[1]) * deviations.rightCols(count);
  compound.rightCols(dim) = noise_diag.cwiseSqrt().asDiagonal();
  Mat s = tria(compound);
  const double wc0 = w.wc[0];
  if (wc0 != 0.0) {
    s = chol_update(s, std::sqrt(std::abs(wc0)) * deviations.col(0), wc0 > 0.0 ? 1 : -1);
  }
  return s;
}

Mat apply_map(const Map& f, const Mat& pts) {
  Vec first = f(pts.col(0));
  Mat out(first.size(), pts.cols());
  out.col(0) = first;
  for (Eigen::Index i = 1; i < pts.cols(); ++i) out.col(i) = f(pts.col(i));
  return out;
}

}  // namespace

SrUkfState predict(const SrUkfState& state, const SigmaWeights& w, const Vec& q_diag, const Map& transition) {
  const Mat pts = sigma_points(state.mean, state.sqrt_cov, w.lambda_u);
  const Mat prop = transition ? apply_map(transition, pts) : pts;
  const Vec mean = prop * w.wm;
  const Mat dev = prop.colwise() - mean;
  return {mean, sqrt_covariance(dev, w, q_diag), state.t + 1};
}

SrUkfState update(const SrUkfState& state, const SigmaWeights& w, const Vec& y, const Map& h, const Vec& r_diag) {
  if (y.size() != r_diag.size()) throw UsageError("measurement dimension does not match R");
  const Mat pts = sigma_points(state.mean, state.sqrt_cov, w.lambda_u);
  const Mat obs = apply_map(h, pts);
  if (obs.rows() != y.size()) throw UsageError("observation map dimension does not match measurement");
  const Vec y_hat = obs * w.wm;
  const Mat obs_dev = obs.colwise() - y_hat;
  const Mat x_dev = pts.colwise() - state.mean;
  const Vec innovation = y - y_hat;

  Mat s_yy;
  try {
    s_yy = sqrt_covariance(obs_dev, w, r_diag);
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << "innovation factor failed at t=" << state.t << ": " << e.what() << "; |innovation|=" << innovation.norm();
    throw NumericalError(msg.str());
  }
  const Mat p_xy = x_dev * w.wc.asDiagonal() * obs_dev.transpose();
  // K = P_xy (S_yy S_yy^T)^-1 via two triangular solves on K^T
  Mat kt = s_yy.triangularView<Eigen::Lower>().solve(p_xy.transpose());
  s_yy.transpose().triangularView<Eigen::Upper>().solveInPlace(kt);
  const Mat gain = kt.transpose();

  SrUkfState out{state.mean + gain * innovation, state.sqrt_cov, state.t};
  const Mat u = gain * s_yy;
  try {
    for (Eigen::Index j = 0; j < u.cols(); ++j) out.sqrt_cov = chol_update(out.sqrt_cov, u.col(j), -1);
  } catch (const NumericalError& e) {
    const Vec d = s_yy.diagonal().cwiseAbs();
    std::ostringstream msg;
    msg << "covariance downdate failed at t=" << state.t << ": " << e.what() << "; |innovation|=" << innovation.norm()
        << ", cond(S_yy)~" << d.maxCoeff() / d.minCoeff();
    throw NumericalError(msg.str());
  }
  return out;
}

void UkfConfig::validate(int measurement_dim) const {
  const double scale = alpha * alpha * (kNumHi + kappa);
  if (!(scale > 0.0)) throw ConfigError("alpha^2 (n + kappa) must be positive");
  if (q_diag.size() != kNumHi || !(q_diag.array() > 0.0).all()) throw ConfigError("Q diagonal must be 10 positive values");
  if (r_diag.size() != measurement_dim || !(r_diag.array() > 0.0).all()) {
    throw ConfigError("R diagonal must be " + std::to_string(measurement_dim) + " positive values");
  }
  if (x0.size() != kNumHi) throw ConfigError("x0 must have 10 values");
  if (s0.rows() != kNumHi || s0.cols() != kNumHi) throw ConfigError("S0 must be 10 x 10");
  if (!s0.isApprox(Mat(s0.triangularView<Eigen::Lower>())) || !(s0.diagonal().array() > 0.0).all()) {
    throw ConfigError("S0 must be lower triangular with positive diagonal");
  }
}

Vec build_r_from_noise(const Vec& delta, double gamma) {
  Vec r = ((gamma * delta).array().square() / 3.0 / 10.0).matrix();
  return r.cwiseMax(1e-12);
}

FilterResult filter_trajectory(const Mat& sensors, std::span<const OperatingCondition> ocs, const UkfConfig& cfg,
                               const SurrogateEngine& engine) {
  const int m = kNumChannels * static_cast<int>(ocs.size());
  if (sensors.cols() != m) throw UsageError("sensor columns do not match the OC mode");
  cfg.validate(m);
  const SigmaWeights w = make_weights(kNumHi, cfg.alpha, cfg.beta, cfg.kappa);
  const std::vector<OperatingCondition> oc_list(ocs.begin(), ocs.end());
  const Map h = [&engine, &oc_list](const Vec& x) { return engine.evaluate_stacked(x, oc_list); };

  FilterResult res;
  res.estimates = Mat::Constant(sensors.rows(), kNumHi, std::nan(""));
  res.std_devs = Mat::Constant(sensors.rows(), kNumHi, std::nan(""));
  SrUkfState state{cfg.x0, cfg.s0, 0};
  const auto& bounds = hi_bounds();
  for (Eigen::Index t = 0; t < sensors.rows(); ++t) {
    const Vec y = sensors.row(t).transpose();
    if (!y.allFinite()) {
      res.ok = false;
      res.failure = "non-finite sensor value at t=" + std::to_string(t);
      return res;
    }
    try {
      state = predict(state, w, cfg.q_diag);
      state = update(state, w, y, h, cfg.r_diag);
    } catch (const NumericalError& e) {
      res.ok = false;
      res.failure = e.what();
      return res;
    }
    if (cfg.project_to_bounds) {
      for (int i = 0; i < kNumHi; ++i) state.mean[i] = std::clamp(state.mean[i], bounds[i].lower, bounds[i].upper);
    }
    if (!state.mean.allFinite()) {
      res.ok = false;
      res.failure = "filter produced non-finite estimate at t=" + std::to_string(t);
      return res;
    }
    res.estimates.row(t) = state.mean.transpose();
    res.std_devs.row(t) = state.sqrt_cov.rowwise().norm().transpose();
  }
  return res;
}

}  // namespace turbohse::ukf
