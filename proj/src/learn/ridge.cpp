#include "turbohse/learn/ridge.hpp"

#include <cmath>

namespace turbohse::learn {

Mat RidgeModel::predict(const Mat& x) const {
  if (x.cols() != weights.rows()) throw UsageError("ridge input width mismatch");
  return (x * weights).rowwise() + intercept.transpose();
}

RidgeModel ridge_fit(const Mat& x, const Mat& y, double l2) {
  if (!(l2 >= 0.0)) throw UsageError("ridge penalty must be >= 0");
  if (x.rows() != y.rows() || x.rows() == 0) throw UsageError("ridge needs matching non-empty X and Y");
  const Vec x_mean = x.colwise().mean().transpose();
  const Vec y_mean = y.colwise().mean().transpose();
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  Mat a(n + d, d);
  a.topRows(n) = x.rowwise() - x_mean.transpose();
  a.bottomRows(d) = std::sqrt(l2) * Mat::Identity(d, d);
  Mat b = Mat::Zero(n + d, y.cols());
  b.topRows(n) = y.rowwise() - y_mean.transpose();

  RidgeModel m;
  m.weights = a.colPivHouseholderQr().solve(b);
  m.intercept = y_mean - m.weights.transpose() * x_mean;
  return m;
}

}  // namespace turbohse::learn
