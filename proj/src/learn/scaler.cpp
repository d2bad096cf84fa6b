#include "turbohse/learn/scaler.hpp"

#include <string>

namespace turbohse::learn {

namespace {
constexpr double kFloor = 1e-8;
}

void Scaler::fit(const Mat& rows) {
  if (rows.rows() == 0) throw UsageError("cannot fit a scaler on zero rows");
  if (mode_ == ScalerMode::Standard) {
    offset_ = rows.colwise().mean().transpose();
    const Mat centered = rows.rowwise() - offset_.transpose();
    scale_ = (centered.colwise().squaredNorm() / static_cast<double>(rows.rows())).cwiseSqrt().transpose();
  } else {
    offset_ = rows.colwise().minCoeff().transpose();
    scale_ = rows.colwise().maxCoeff().transpose() - offset_;
  }
  scale_ = scale_.cwiseMax(kFloor);
  fitted_ = true;
}

void Scaler::require_fitted(Eigen::Index cols) const {
  if (!fitted_) throw UsageError("scaler used before fit");
  if (cols != offset_.size()) {
    throw UsageError("scaler fitted on " + std::to_string(offset_.size()) + " features, got " + std::to_string(cols));
  }
}

Mat Scaler::transform(const Mat& rows) const {
  require_fitted(rows.cols());
  return (rows.rowwise() - offset_.transpose()).array().rowwise() / scale_.transpose().array();
}

Mat Scaler::inverse_transform(const Mat& rows) const {
  require_fitted(rows.cols());
  return (rows.array().rowwise() * scale_.transpose().array()).matrix().rowwise() + offset_.transpose();
}

Scaler Scaler::from_stats(ScalerMode mode, Vec offset, Vec scale) {
  if (offset.size() != scale.size()) throw UsageError("scaler statistics size mismatch");
  Scaler s(mode);
  s.offset_ = std::move(offset);
  s.scale_ = std::move(scale);
  s.fitted_ = true;
  return s;
}

}  // namespace turbohse::learn
