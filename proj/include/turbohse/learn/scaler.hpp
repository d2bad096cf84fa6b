#pragma once

#include "turbohse/common.hpp"

namespace turbohse::learn {

enum class ScalerMode { Standard, MinMax };

/// Per-column feature scaler. Rows are samples.
class Scaler {
 public:
  explicit Scaler(ScalerMode mode = ScalerMode::Standard) : mode_(mode) {}

  void fit(const Mat& rows);
  Mat transform(const Mat& rows) const;
  Mat inverse_transform(const Mat& rows) const;

  bool fitted() const { return fitted_; }
  ScalerMode mode() const { return mode_; }
  /// mean (Standard) or min (MinMax)
  const Vec& offset() const { return offset_; }
  /// std (Standard) or max - min (MinMax), floored at 1e-8
  const Vec& scale() const { return scale_; }

  static Scaler from_stats(ScalerMode mode, Vec offset, Vec scale);

 private:
  void require_fitted(Eigen::Index cols) const;

  ScalerMode mode_;
  bool fitted_ = false;
  Vec offset_;
  Vec scale_;
};

}  // namespace turbohse::learn
