#include "turbohse/learn/gru.hpp"

#include <cmath>

namespace turbohse::learn {

namespace {

Mat sigmoid(const Mat& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Mat affine(const Mat& w, const Mat& x, const Mat& u, const Mat& h, const Mat& b) {
  Mat out = w * x;
  out.noalias() += u * h;
  out.colwise() += b.col(0);
  return out;
}

struct StepCache {
  Mat h_prev;
  Mat z;
  Mat r;
  Mat hc;
  Mat h;
};

}  // namespace

Gru::Gru(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  params_.resize(kCount);
  for (int g : {Wz, Wr, Wh}) params_[g] = glorot(hidden_dim, input_dim, rng);
  for (int g : {Uz, Ur, Uh}) params_[g] = glorot(hidden_dim, hidden_dim, rng);
  for (int g : {Bz, Br, Bh}) params_[g] = Mat::Zero(hidden_dim, 1);
  params_[Wo] = glorot(output_dim, hidden_dim, rng);
  params_[Bo] = Mat::Zero(output_dim, 1);
}

Mat Gru::step(const Mat& x, const Mat& h) const {
  const auto& p = params_;
  const Mat z = sigmoid(affine(p[Wz], x, p[Uz], h, p[Bz]));
  const Mat r = sigmoid(affine(p[Wr], x, p[Ur], h, p[Br]));
  const Mat hc = affine(p[Wh], x, p[Uh], r.cwiseProduct(h), p[Bh]).array().tanh().matrix();
  return h + z.cwiseProduct(hc - h);
}

Mat Gru::readout(const Mat& h) const { return (params_[Wo] * h).colwise() + params_[Bo].col(0); }

std::vector<Mat> Gru::forward(std::span<const Mat> xs, const Mat& h0, Mat* h_last) const {
  std::vector<Mat> out;
  out.reserve(xs.size());
  Mat h = h0;
  for (const Mat& x : xs) {
    h = step(x, h);
    out.push_back(readout(h));
  }
  if (h_last != nullptr) *h_last = h;
  return out;
}

Gru::LossGrad Gru::loss_grad(std::span<const Mat> xs, std::span<const Mat> ys, const Mat& mask,
                             const Mat& h0) const {
  const auto& p = params_;
  const std::size_t steps = xs.size();
  if (ys.size() != steps || static_cast<std::size_t>(mask.rows()) != steps) {
    throw UsageError("GRU window: inputs, targets and mask lengths differ");
  }
  LossGrad res;
  res.weight = mask.sum();
  res.grads = zeros_like(p);
  const double denom = res.weight * output_dim();

  std::vector<StepCache> cache(steps);
  std::vector<Mat> d_out(steps);
  Mat h = h0;
  double sse = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    StepCache& c = cache[t];
    c.h_prev = h;
    c.z = sigmoid(affine(p[Wz], xs[t], p[Uz], h, p[Bz]));
    c.r = sigmoid(affine(p[Wr], xs[t], p[Ur], h, p[Br]));
    c.hc = affine(p[Wh], xs[t], p[Uh], c.r.cwiseProduct(h), p[Bh]).array().tanh().matrix();
    c.h = h + c.z.cwiseProduct(c.hc - h);
    h = c.h;
    const Mat resid = (readout(h) - ys[t]) * mask.row(static_cast<Eigen::Index>(t)).asDiagonal();
    sse += resid.squaredNorm();
    d_out[t] = denom > 0 ? Mat(2.0 / denom * resid) : Mat(Mat::Zero(resid.rows(), resid.cols()));
  }
  res.h_last = h;
  res.loss = denom > 0 ? sse / denom : 0.0;

  auto& g = res.grads;
  Mat dh = Mat::Zero(h0.rows(), h0.cols());
  for (std::size_t k = steps; k-- > 0;) {
    const StepCache& c = cache[k];
    g[Wo].noalias() += d_out[k] * c.h.transpose();
    g[Bo] += d_out[k].rowwise().sum();
    dh.noalias() += p[Wo].transpose() * d_out[k];

    const Mat dz = dh.cwiseProduct(c.hc - c.h_prev);
    const Mat dhc = dh.cwiseProduct(c.z);
    Mat dh_prev = dh - dh.cwiseProduct(c.z);

    const Mat da_h = dhc.cwiseProduct((1.0 - c.hc.array().square()).matrix());
    const Mat rh = c.r.cwiseProduct(c.h_prev);
    g[Wh].noalias() += da_h * xs[k].transpose();
    g[Uh].noalias() += da_h * rh.transpose();
    g[Bh] += da_h.rowwise().sum();
    const Mat d_rh = p[Uh].transpose() * da_h;
    const Mat dr = d_rh.cwiseProduct(c.h_prev);
    dh_prev += d_rh.cwiseProduct(c.r);

    const Mat da_z = dz.cwiseProduct(c.z.cwiseProduct((1.0 - c.z.array()).matrix()));
    g[Wz].noalias() += da_z * xs[k].transpose();
    g[Uz].noalias() += da_z * c.h_prev.transpose();
    g[Bz] += da_z.rowwise().sum();
    dh_prev.noalias() += p[Uz].transpose() * da_z;

    const Mat da_r = dr.cwiseProduct(c.r.cwiseProduct((1.0 - c.r.array()).matrix()));
    g[Wr].noalias() += da_r * xs[k].transpose();
    g[Ur].noalias() += da_r * c.h_prev.transpose();
    g[Br] += da_r.rowwise().sum();
    dh_prev.noalias() += p[Ur].transpose() * da_r;

    dh = std::move(dh_prev);
  }
  return res;
}

}  // namespace turbohse::learn
