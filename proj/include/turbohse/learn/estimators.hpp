#pragma once

// Trainable estimators built on the primitives in mlp.hpp / gru.hpp /
// ridge.hpp. Every estimator scales inputs and targets with scalers fitted on
// its training rows only and reports predictions in original units.

#include "turbohse/learn/gru.hpp"
#include "turbohse/learn/mlp.hpp"
#include "turbohse/learn/ridge.hpp"
#include "turbohse/learn/scaler.hpp"

#include <functional>
#include <string>
#include <vector>

namespace turbohse::learn {

struct TrainConfig {
  double lr = 1e-3;
  int epochs = 100;
  int batch_size = 64;
  std::uint64_t seed = 0;
  /// Stop after this many epochs without validation improvement.
  int patience = 10;
  /// Truncation window for backpropagation through time.
  int bptt_window = 50;
  bool use_mask = true;
  ScalerMode scaler = ScalerMode::Standard;
  /// Std of Gaussian noise added to scaled inputs of every training batch
  /// (GRU only; 0 disables).
  double input_noise = 0.0;
  /// Called once per epoch with (epoch, train loss, val loss).
  std::function<void(int, double, double)> on_epoch;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;
};

/// Rows are samples.
struct TabularData {
  Mat x;
  Mat y;
};

/// One entry per sequence; each is L_i x d.
struct SequenceData {
  std::vector<Mat> x;
  std::vector<Mat> y;
};

// ---------------------------------------------------------------- MLP

struct MlpConfig {
  std::vector<int> hidden = {128, 128};
  Activation activation = Activation::Softplus;
};

struct MlpRegressor {
  Scaler x_scaler;
  Scaler y_scaler;
  Mlp net;

  Mat predict(const Mat& x) const;
};

/// Mean squared error of net on column-per-sample data, with its gradient.
double mlp_loss_grad(const Mlp& net, const Mat& x, const Mat& y, Params* grads);

MlpRegressor mlp_train(const TabularData& train, const TabularData& val, const MlpConfig& model,
                       const TrainConfig& cfg, TrainHistory* history = nullptr);

struct GridResult {
  double lr = 0.0;
  int hidden = 0;
  double val_loss = 0.0;
};

/// Picks (lr, hidden width) minimizing best validation loss; each candidate
/// uses two hidden layers of the given width.
GridResult grid_search_mlp(const TabularData& train, const TabularData& val, const std::vector<double>& lrs,
                           const std::vector<int>& hidden_sizes, const TrainConfig& cfg);

// ---------------------------------------------------------------- GRU

struct GruConfig {
  int hidden = 64;
};

struct GruRegressor {
  Scaler x_scaler;
  Scaler y_scaler;
  Gru net;

  /// Runs the whole sequence (L x d) from a zero hidden state.
  Mat predict(const Mat& sequence) const;
};

/// Sequences padded to a common length, step-major.
struct PaddedBatch {
  std::vector<Mat> x;  // per step, d x B
  std::vector<Mat> y;  // per step, k x B
  Mat mask;            // T x B
};
PaddedBatch pad_sequences(const std::vector<Mat>& xs, const std::vector<Mat>& ys, bool use_mask = true);

GruRegressor gru_train(const SequenceData& train, const SequenceData& val, const GruConfig& model,
                       const TrainConfig& cfg, TrainHistory* history = nullptr);

// ---------------------------------------------------------------- AE + probe

struct AeConfig {
  int latent = 8;
  std::vector<int> hidden = {32};
  Activation activation = Activation::Softplus;
};

struct Autoencoder {
  Scaler scaler;
  Mlp encoder;
  Mlp decoder;

  /// Latent codes, one row per input row.
  Mat encode(const Mat& rows) const;
  /// Reconstruction in original units.
  Mat reconstruct(const Mat& rows) const;
};

/// Reconstruction MSE on column-per-sample scaled data.
double ae_loss_grad(const Mlp& encoder, const Mlp& decoder, const Mat& x, Params* enc_grads, Params* dec_grads);

/// Trains on sensor rows only; there is no target argument.
Autoencoder ae_train(const Mat& train_rows, const Mat& val_rows, const AeConfig& model, const TrainConfig& cfg,
                     TrainHistory* history = nullptr);

/// Ridge probe from frozen latent codes to indicators.
struct LatentProbe {
  RidgeModel ridge;

  Mat predict(const Autoencoder& encoder, const Mat& sensor_rows) const;
};

LatentProbe probe_latents(const Autoencoder& frozen, const Mat& sensor_rows, const Mat& hi_rows, double l2 = 1e-6);

/// Ridge baseline / raw-sensor probe on standard-scaled inputs.
struct RidgeRegressor {
  Scaler x_scaler;
  RidgeModel ridge;

  Mat predict(const Mat& x) const;
};
RidgeRegressor ridge_train(const TabularData& train, double l2 = 1e-6);

}  // namespace turbohse::learn
