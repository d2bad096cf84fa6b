#include "turbohse/learn/mlp.hpp"

#include <cmath>

namespace turbohse::learn {

Mat activate(Activation a, const Mat& pre) {
  switch (a) {
    case Activation::Linear:
      return pre;
    case Activation::Softplus:
      // log(1 + e^x), overflow-safe
      return pre.unaryExpr([](double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); });
    case Activation::Tanh:
      return pre.array().tanh().matrix();
  }
  return pre;
}

Mat activate_grad(Activation a, const Mat& pre) {
  switch (a) {
    case Activation::Linear:
      return Mat::Ones(pre.rows(), pre.cols());
    case Activation::Softplus:
      return pre.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::Tanh:
      return (1.0 - pre.array().tanh().square()).matrix();
  }
  return Mat::Ones(pre.rows(), pre.cols());
}

Mlp::Mlp(std::vector<int> sizes, Activation hidden, std::uint64_t seed) : sizes_(std::move(sizes)), hidden_(hidden) {
  if (sizes_.size() < 2) throw UsageError("network needs at least input and output sizes");
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    params_.push_back(glorot(sizes_[l + 1], sizes_[l], rng));
    params_.push_back(Mat::Zero(sizes_[l + 1], 1));
  }
}

Mat Mlp::forward(const Mat& x) const {
  Mat h = x;
  for (int l = 0; l < num_layers(); ++l) {
    Mat pre = (params_[2 * l] * h).colwise() + params_[2 * l + 1].col(0);
    h = l + 1 < num_layers() ? activate(hidden_, pre) : pre;
  }
  return h;
}

Mat Mlp::forward(const Mat& x, Cache& cache) const {
  cache.inputs.clear();
  cache.pre.clear();
  Mat h = x;
  for (int l = 0; l < num_layers(); ++l) {
    cache.inputs.push_back(h);
    Mat pre = (params_[2 * l] * h).colwise() + params_[2 * l + 1].col(0);
    h = l + 1 < num_layers() ? activate(hidden_, pre) : pre;
    cache.pre.push_back(std::move(pre));
  }
  return h;
}

Params Mlp::backward(const Cache& cache, const Mat& d_out, Mat* d_input) const {
  Params grads(params_.size());
  Mat delta = d_out;
  for (int l = num_layers() - 1; l >= 0; --l) {
    if (l + 1 < num_layers()) delta = delta.cwiseProduct(activate_grad(hidden_, cache.pre[l]));
    grads[2 * l] = delta * cache.inputs[l].transpose();
    grads[2 * l + 1] = delta.rowwise().sum();
    if (l > 0 || d_input != nullptr) delta = params_[2 * l].transpose() * delta;
  }
  if (d_input != nullptr) *d_input = std::move(delta);
  return grads;
}

}  // namespace turbohse::learn
