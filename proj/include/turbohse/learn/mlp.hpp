#pragma once

#include "turbohse/learn/params.hpp"

#include <random>
#include <vector>

namespace turbohse::learn {

enum class Activation { Linear, Softplus, Tanh };

/// Fully connected network. Inputs and outputs are column-per-sample.
/// Hidden layers use `hidden`; the last layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, Activation hidden, std::uint64_t seed);

  struct Cache {
    std::vector<Mat> inputs;  // input to each layer
    std::vector<Mat> pre;     // pre-activation of each layer
  };

  Mat forward(const Mat& x) const;
  Mat forward(const Mat& x, Cache& cache) const;
  /// Gradients wrt parameters given dL/d(output). When d_input is non-null it
  /// receives dL/d(input).
  Params backward(const Cache& cache, const Mat& d_out, Mat* d_input = nullptr) const;

  const std::vector<int>& sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }

  /// [W1, b1, W2, b2, ...]
  Params& params() { return params_; }
  const Params& params() const { return params_; }

 private:
  std::vector<int> sizes_;
  Activation hidden_ = Activation::Softplus;
  Params params_;
};

Mat activate(Activation a, const Mat& pre);
/// d activation / d pre, elementwise.
Mat activate_grad(Activation a, const Mat& pre);

}  // namespace turbohse::learn
