#include "turbohse/learn/params.hpp"

#include <cmath>
#include <cstring>

namespace turbohse::learn {

Params zeros_like(const Params& p) {
  Params out;
  out.reserve(p.size());
  for (const Mat& m : p) out.push_back(Mat::Zero(m.rows(), m.cols()));
  return out;
}

Eigen::Index total_size(const Params& p) {
  Eigen::Index n = 0;
  for (const Mat& m : p) n += m.size();
  return n;
}

Vec flatten(const Params& p) {
  Vec out(total_size(p));
  Eigen::Index k = 0;
  for (const Mat& m : p) {
    out.segment(k, m.size()) = m.reshaped();
    k += m.size();
  }
  return out;
}

void unflatten(const Vec& flat, Params& p) {
  if (flat.size() != total_size(p)) throw UsageError("flat parameter vector has wrong size");
  Eigen::Index k = 0;
  for (Mat& m : p) {
    m.reshaped() = flat.segment(k, m.size());
    k += m.size();
  }
}

bool all_finite(const Params& p) {
  for (const Mat& m : p) {
    if (!m.allFinite()) return false;
  }
  return true;
}

std::uint64_t params_hash(const Params& p) {
  std::uint64_t h = 1469598103934665603ull;
  for (const Mat& m : p) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    const std::size_t n = static_cast<std::size_t>(m.size()) * sizeof(double);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  }
  return h;
}

Mat glorot(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Mat w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

Adam::Adam(const Params& shape, AdamOptions opts) : opts_(opts), m_(zeros_like(shape)), v_(zeros_like(shape)) {}

void Adam::step(Params& params, const Params& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * grads[i];
    v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -= opts_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + opts_.eps);
  }
}

}  // namespace turbohse::learn
