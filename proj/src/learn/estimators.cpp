#include "turbohse/learn/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace turbohse::learn {

namespace {

void check_finite_loss(double loss, const char* model, int epoch, std::size_t batch) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << model << " training diverged: non-finite loss at epoch " << epoch << ", batch " << batch;
    throw NumericalError(msg.str());
  }
}

// Mini-batch Adam over column-per-sample data with early stopping; restores
// the parameters of the best validation epoch.
void train_columns(Params& params, Eigen::Index n_samples, const TrainConfig& cfg, const char* model,
                   const std::function<double(const std::vector<Eigen::Index>&, Params&)>& batch_loss_grad,
                   const std::function<double()>& val_loss, TrainHistory* history) {
  if (!(cfg.lr > 0.0) || cfg.epochs < 1 || cfg.batch_size < 1) throw ConfigError("training hyperparameters must be positive");
  Adam adam(params, {cfg.lr});
  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_samples));
  std::iota(order.begin(), order.end(), 0);

  Params best = params;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  TrainHistory local;
  TrainHistory& hist = history ? *history : local;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
      Params grads;
      const double loss = batch_loss_grad(idx, grads);
      check_finite_loss(loss, model, epoch, batches);
      adam.step(params, grads);
      sum += loss;
      ++batches;
    }
    const double train_loss = sum / static_cast<double>(std::max<std::size_t>(batches, 1));
    const double vl = val_loss();
    check_finite_loss(vl, model, epoch, batches);
    hist.train_loss.push_back(train_loss);
    hist.val_loss.push_back(vl);
    if (cfg.on_epoch) cfg.on_epoch(epoch, train_loss, vl);
    if (vl < best_val) {
      best_val = vl;
      best = params;
      hist.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  params = std::move(best);
}

}  // namespace

// ---------------------------------------------------------------- MLP

Mat MlpRegressor::predict(const Mat& x) const {
  const Mat out = net.forward(x_scaler.transform(x).transpose());
  return y_scaler.inverse_transform(out.transpose());
}

double mlp_loss_grad(const Mlp& net, const Mat& x, const Mat& y, Params* grads) {
  Mlp::Cache cache;
  const Mat resid = net.forward(x, cache) - y;
  const double denom = static_cast<double>(resid.size());
  if (grads != nullptr) *grads = net.backward(cache, (2.0 / denom) * resid);
  return resid.squaredNorm() / denom;
}

MlpRegressor mlp_train(const TabularData& train, const TabularData& val, const MlpConfig& model,
                       const TrainConfig& cfg, TrainHistory* history) {
  if (train.x.rows() == 0 || train.x.rows() != train.y.rows()) throw UsageError("MLP needs matching training rows");
  MlpRegressor reg{Scaler(cfg.scaler), Scaler(cfg.scaler), {}};
  reg.x_scaler.fit(train.x);
  reg.y_scaler.fit(train.y);
  std::vector<int> sizes{static_cast<int>(train.x.cols())};
  sizes.insert(sizes.end(), model.hidden.begin(), model.hidden.end());
  sizes.push_back(static_cast<int>(train.y.cols()));
  reg.net = Mlp(sizes, model.activation, cfg.seed);

  const Mat xs = reg.x_scaler.transform(train.x).transpose();
  const Mat ys = reg.y_scaler.transform(train.y).transpose();
  const bool has_val = val.x.rows() > 0;
  const Mat xv = has_val ? Mat(reg.x_scaler.transform(val.x).transpose()) : xs;
  const Mat yv = has_val ? Mat(reg.y_scaler.transform(val.y).transpose()) : ys;

  Mlp& net = reg.net;
  train_columns(
      net.params(), xs.cols(), cfg, "MLP",
      [&](const std::vector<Eigen::Index>& idx, Params& grads) {
        return mlp_loss_grad(net, xs(Eigen::all, idx), ys(Eigen::all, idx), &grads);
      },
      [&] { return mlp_loss_grad(net, xv, yv, nullptr); }, history);
  return reg;
}

GridResult grid_search_mlp(const TabularData& train, const TabularData& val, const std::vector<double>& lrs,
                           const std::vector<int>& hidden_sizes, const TrainConfig& cfg) {
  GridResult best{0.0, 0, std::numeric_limits<double>::infinity()};
  for (double lr : lrs) {
    for (int width : hidden_sizes) {
      TrainConfig c = cfg;
      c.lr = lr;
      TrainHistory hist;
      mlp_train(train, val, {{width, width}, Activation::Softplus}, c, &hist);
      const double v = *std::min_element(hist.val_loss.begin(), hist.val_loss.end());
      if (v < best.val_loss) best = {lr, width, v};
    }
  }
  return best;
}

// ---------------------------------------------------------------- GRU

Mat GruRegressor::predict(const Mat& sequence) const {
  const Mat xs = x_scaler.transform(sequence);
  Mat h = Mat::Zero(net.hidden_dim(), 1);
  Mat out(sequence.rows(), net.output_dim());
  for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
    h = net.step(xs.row(t).transpose(), h);
    out.row(t) = net.readout(h).transpose();
  }
  return y_scaler.inverse_transform(out);
}

PaddedBatch pad_sequences(const std::vector<Mat>& xs, const std::vector<Mat>& ys, bool use_mask) {
  if (xs.size() != ys.size() || xs.empty()) throw UsageError("padding needs matching non-empty sequence lists");
  Eigen::Index len = 0;
  for (const Mat& s : xs) len = std::max(len, s.rows());
  const auto b = static_cast<Eigen::Index>(xs.size());
  const Eigen::Index d = xs.front().cols();
  const Eigen::Index k = ys.front().cols();
  PaddedBatch out;
  out.x.assign(static_cast<std::size_t>(len), Mat::Zero(d, b));
  out.y.assign(static_cast<std::size_t>(len), Mat::Zero(k, b));
  out.mask = use_mask ? Mat::Zero(len, b) : Mat::Ones(len, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const Mat& sx = xs[static_cast<std::size_t>(j)];
    const Mat& sy = ys[static_cast<std::size_t>(j)];
    if (sx.rows() != sy.rows()) throw UsageError("sequence input/target lengths differ");
    for (Eigen::Index t = 0; t < sx.rows(); ++t) {
      out.x[static_cast<std::size_t>(t)].col(j) = sx.row(t).transpose();
      out.y[static_cast<std::size_t>(t)].col(j) = sy.row(t).transpose();
      out.mask(t, j) = 1.0;
    }
  }
  return out;
}

GruRegressor gru_train(const SequenceData& train, const SequenceData& val, const GruConfig& model,
                       const TrainConfig& cfg, TrainHistory* history) {
  if (train.x.empty() || train.x.size() != train.y.size()) throw UsageError("GRU needs matching training sequences");
  if (cfg.bptt_window < 1) throw ConfigError("bptt_window must be >= 1");
  GruRegressor reg{Scaler(cfg.scaler), Scaler(cfg.scaler), {}};
  {
    Eigen::Index rows = 0;
    for (const Mat& s : train.x) rows += s.rows();
    Mat all_x(rows, train.x.front().cols());
    Mat all_y(rows, train.y.front().cols());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < train.x.size(); ++i) {
      all_x.middleRows(r, train.x[i].rows()) = train.x[i];
      all_y.middleRows(r, train.y[i].rows()) = train.y[i];
      r += train.x[i].rows();
    }
    reg.x_scaler.fit(all_x);
    reg.y_scaler.fit(all_y);
  }
  reg.net = Gru(static_cast<int>(train.x.front().cols()), model.hidden, static_cast<int>(train.y.front().cols()),
                cfg.seed);

  auto scaled = [&](const SequenceData& data) {
    std::vector<Mat> xs, ys;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      xs.push_back(reg.x_scaler.transform(data.x[i]));
      ys.push_back(reg.y_scaler.transform(data.y[i]));
    }
    return std::pair{xs, ys};
  };
  auto [train_x, train_y] = scaled(train);
  const bool has_val = !val.x.empty();
  auto [val_x, val_y] = has_val ? scaled(val) : std::pair{train_x, train_y};
  const PaddedBatch val_batch = pad_sequences(val_x, val_y, true);

  Gru& net = reg.net;
  Params& params = net.params();
  Adam adam(params, {cfg.lr});
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), 0);

  auto full_loss = [&](const PaddedBatch& batch) {
    const Mat h0 = Mat::Zero(net.hidden_dim(), batch.mask.cols());
    double sse = 0.0;
    Mat h = h0;
    for (std::size_t t = 0; t < batch.x.size(); ++t) {
      h = net.step(batch.x[t], h);
      sse += ((net.readout(h) - batch.y[t]) * batch.mask.row(static_cast<Eigen::Index>(t)).asDiagonal()).squaredNorm();
    }
    return sse / (batch.mask.sum() * net.output_dim());
  };

  Params best = params;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  TrainHistory local;
  TrainHistory& hist = history ? *history : local;
  const auto window = static_cast<std::size_t>(cfg.bptt_window);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted = 0.0;
    double weight = 0.0;
    std::size_t updates = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Mat> bx, by;
      for (std::size_t i = start; i < stop; ++i) {
        bx.push_back(train_x[order[i]]);
        by.push_back(train_y[order[i]]);
      }
      PaddedBatch batch = pad_sequences(bx, by, cfg.use_mask);
      if (cfg.input_noise > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.input_noise);
        for (Mat& x : batch.x) x += x.unaryExpr([&](double) { return noise(rng); });
      }
      Mat h = Mat::Zero(net.hidden_dim(), batch.mask.cols());
      for (std::size_t w0 = 0; w0 < batch.x.size(); w0 += window) {
        const std::size_t len = std::min(window, batch.x.size() - w0);
        const Mat mask = batch.mask.middleRows(static_cast<Eigen::Index>(w0), static_cast<Eigen::Index>(len));
        if (mask.sum() == 0.0) break;
        auto lg = net.loss_grad(std::span(batch.x).subspan(w0, len), std::span(batch.y).subspan(w0, len), mask, h);
        check_finite_loss(lg.loss, "GRU", epoch, updates);
        if (!lg.h_last.allFinite()) {
          throw NumericalError("GRU hidden state became non-finite at step " + std::to_string(w0 + len - 1));
        }
        adam.step(params, lg.grads);
        weighted += lg.loss * lg.weight;
        weight += lg.weight;
        h = lg.h_last;
        ++updates;
      }
    }
    const double train_loss = weight > 0 ? weighted / weight : 0.0;
    const double vl = full_loss(val_batch);
    check_finite_loss(vl, "GRU", epoch, updates);
    hist.train_loss.push_back(train_loss);
    hist.val_loss.push_back(vl);
    if (cfg.on_epoch) cfg.on_epoch(epoch, train_loss, vl);
    if (vl < best_val) {
      best_val = vl;
      best = params;
      hist.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  params = std::move(best);
  return reg;
}

// ---------------------------------------------------------------- AE + probe

Mat Autoencoder::encode(const Mat& rows) const {
  return encoder.forward(scaler.transform(rows).transpose()).transpose();
}

Mat Autoencoder::reconstruct(const Mat& rows) const {
  const Mat z = encoder.forward(scaler.transform(rows).transpose());
  return scaler.inverse_transform(decoder.forward(z).transpose());
}

double ae_loss_grad(const Mlp& encoder, const Mlp& decoder, const Mat& x, Params* enc_grads, Params* dec_grads) {
  Mlp::Cache enc_cache, dec_cache;
  const Mat z = encoder.forward(x, enc_cache);
  const Mat resid = decoder.forward(z, dec_cache) - x;
  const double denom = static_cast<double>(resid.size());
  if (enc_grads != nullptr || dec_grads != nullptr) {
    Mat dz;
    Params dg = decoder.backward(dec_cache, (2.0 / denom) * resid, &dz);
    if (dec_grads != nullptr) *dec_grads = std::move(dg);
    if (enc_grads != nullptr) *enc_grads = encoder.backward(enc_cache, dz);
  }
  return resid.squaredNorm() / denom;
}

Autoencoder ae_train(const Mat& train_rows, const Mat& val_rows, const AeConfig& model, const TrainConfig& cfg,
                     TrainHistory* history) {
  if (train_rows.rows() == 0) throw UsageError("autoencoder needs training rows");
  const int d = static_cast<int>(train_rows.cols());
  if (model.latent < 1) throw ConfigError("latent dimension must be >= 1");
  Autoencoder ae{Scaler(cfg.scaler), {}, {}};
  ae.scaler.fit(train_rows);
  std::vector<int> enc_sizes{d};
  enc_sizes.insert(enc_sizes.end(), model.hidden.begin(), model.hidden.end());
  enc_sizes.push_back(model.latent);
  std::vector<int> dec_sizes{model.latent};
  dec_sizes.insert(dec_sizes.end(), model.hidden.rbegin(), model.hidden.rend());
  dec_sizes.push_back(d);
  ae.encoder = Mlp(enc_sizes, model.activation, cfg.seed);
  ae.decoder = Mlp(dec_sizes, model.activation, cfg.seed + 1);

  const Mat xs = ae.scaler.transform(train_rows).transpose();
  const Mat xv = val_rows.rows() > 0 ? Mat(ae.scaler.transform(val_rows).transpose()) : xs;

  // joint parameter list: encoder first, then decoder
  const std::size_t n_enc = ae.encoder.params().size();
  Params joint = ae.encoder.params();
  joint.insert(joint.end(), ae.decoder.params().begin(), ae.decoder.params().end());
  auto split = [&](const Params& p) {
    ae.encoder.params().assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n_enc));
    ae.decoder.params().assign(p.begin() + static_cast<std::ptrdiff_t>(n_enc), p.end());
  };
  train_columns(
      joint, xs.cols(), cfg, "autoencoder",
      [&](const std::vector<Eigen::Index>& idx, Params& grads) {
        split(joint);
        Params ge, gd;
        const double loss = ae_loss_grad(ae.encoder, ae.decoder, xs(Eigen::all, idx), &ge, &gd);
        grads = std::move(ge);
        grads.insert(grads.end(), gd.begin(), gd.end());
        return loss;
      },
      [&] {
        split(joint);
        return ae_loss_grad(ae.encoder, ae.decoder, xv, nullptr, nullptr);
      },
      history);
  split(joint);
  return ae;
}

Mat LatentProbe::predict(const Autoencoder& encoder, const Mat& sensor_rows) const {
  return ridge.predict(encoder.encode(sensor_rows));
}

LatentProbe probe_latents(const Autoencoder& frozen, const Mat& sensor_rows, const Mat& hi_rows, double l2) {
  return {ridge_fit(frozen.encode(sensor_rows), hi_rows, l2)};
}

Mat RidgeRegressor::predict(const Mat& x) const { return ridge.predict(x_scaler.transform(x)); }

RidgeRegressor ridge_train(const TabularData& train, double l2) {
  RidgeRegressor reg{Scaler(ScalerMode::Standard), {}};
  reg.x_scaler.fit(train.x);
  reg.ridge = ridge_fit(reg.x_scaler.transform(train.x), train.y, l2);
  return reg;
}

}  // namespace turbohse::learn
