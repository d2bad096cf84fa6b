#pragma once

#include "turbohse/common.hpp"

namespace turbohse::learn {

/// Linear map with unpenalized intercept: Y ~ X W + 1 c^T. Rows are samples.
struct RidgeModel {
  Mat weights;    // d x k
  Vec intercept;  // k

  Mat predict(const Mat& x) const;
};

/// W = (Xc^T Xc + l2 I)^-1 Xc^T Yc on centered data, solved as the
/// least-squares problem [Xc; sqrt(l2) I] W = [Yc; 0] by column-pivoted QR.
RidgeModel ridge_fit(const Mat& x, const Mat& y, double l2);

}  // namespace turbohse::learn
