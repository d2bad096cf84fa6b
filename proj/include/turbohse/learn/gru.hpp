#pragma once

// Single-layer GRU with a linear per-step read-out:
//   z  = sigmoid(Wz x + Uz h + bz)
//   r  = sigmoid(Wr x + Ur h + br)
//   hc = tanh(Wh x + Uh (r * h) + bh)
//   h' = (1 - z) * h + z * hc
//   y  = Wo h' + bo

#include "turbohse/learn/params.hpp"

#include <span>
#include <vector>

namespace turbohse::learn {

class Gru {
 public:
  enum Index { Wz, Uz, Bz, Wr, Ur, Br, Wh, Uh, Bh, Wo, Bo, kCount };

  Gru() = default;
  Gru(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed);

  int input_dim() const { return static_cast<int>(params_[Wz].cols()); }
  int hidden_dim() const { return static_cast<int>(params_[Uz].rows()); }
  int output_dim() const { return static_cast<int>(params_[Wo].rows()); }

  /// One recurrence step; x and h are column-per-sequence.
  Mat step(const Mat& x, const Mat& h) const;
  Mat readout(const Mat& h) const;

  /// Per-step outputs for inputs xs[t] (D x B) starting from h0 (H x B).
  std::vector<Mat> forward(std::span<const Mat> xs, const Mat& h0, Mat* h_last = nullptr) const;

  struct LossGrad {
    double loss = 0.0;       // mean squared error over unmasked entries
    double weight = 0.0;     // number of unmasked (step, sequence) pairs
    Params grads;
    Mat h_last;
  };
  /// Masked MSE and its exact gradient by backpropagation through every step
  /// of the window. mask is T x B with entries 0 or 1.
  LossGrad loss_grad(std::span<const Mat> xs, std::span<const Mat> ys, const Mat& mask, const Mat& h0) const;

  Params& params() { return params_; }
  const Params& params() const { return params_; }

 private:
  Params params_;
};

}  // namespace turbohse::learn
