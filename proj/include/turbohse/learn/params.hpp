#pragma once

#include "turbohse/common.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace turbohse::learn {

/// Ordered list of parameter tensors (biases are n x 1).
using Params = std::vector<Mat>;

Params zeros_like(const Params& p);
Eigen::Index total_size(const Params& p);
Vec flatten(const Params& p);
void unflatten(const Vec& flat, Params& p);
bool all_finite(const Params& p);
/// FNV-1a over the raw parameter bytes; stable within one build.
std::uint64_t params_hash(const Params& p);

/// Glorot-uniform weight matrix.
Mat glorot(int rows, int cols, std::mt19937_64& rng);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const Params& shape, AdamOptions opts);
  void step(Params& params, const Params& grads);

 private:
  AdamOptions opts_;
  Params m_;
  Params v_;
  long t_ = 0;
};

}  // namespace turbohse::learn
