#include "turbohse/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace turbohse::eval {

namespace {

constexpr double kSmapeEps = 1e-8;

// Selected (truth, pred) pairs under the mask.
std::pair<Vec, Vec> select(const Vec& truth, const Vec& pred, const Vec& mask) {
  if (truth.size() != pred.size()) throw UsageError("metric inputs differ in length");
  if (mask.size() == 0) {
    if (truth.size() == 0) throw MetricUndefined("metric over an empty series");
    return {truth, pred};
  }
  if (mask.size() != truth.size()) throw UsageError("mask length differs from series");
  const auto n = static_cast<Eigen::Index>((mask.array() != 0.0).count());
  if (n == 0) throw MetricUndefined("metric over an empty mask");
  Vec t(n), p(n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0) {
      t[k] = truth[i];
      p[k] = pred[i];
      ++k;
    }
  }
  return {t, p};
}

}  // namespace

double smape(const Vec& truth, const Vec& pred, const Vec& mask) {
  const auto [t, p] = select(truth, pred, mask);
  return (2.0 * (p - t).array().abs() / (t.array().abs() + p.array().abs() + kSmapeEps)).mean();
}

double rmse(const Vec& truth, const Vec& pred, const Vec& mask) {
  const auto [t, p] = select(truth, pred, mask);
  return std::sqrt((p - t).squaredNorm() / static_cast<double>(t.size()));
}

double pearson(const Vec& truth, const Vec& pred, const Vec& mask) {
  const auto [t, p] = select(truth, pred, mask);
  const Vec tc = t.array() - t.mean();
  const Vec pc = p.array() - p.mean();
  const double st = tc.norm();
  const double sp = pc.norm();
  if (st == 0.0 || sp == 0.0) throw MetricUndefined("Pearson correlation of a constant series");
  return std::clamp(tc.dot(pc) / (st * sp), -1.0, 1.0);
}

std::vector<SplitPlan> kfold_plan(std::vector<int> ids, int k, std::uint64_t seed) {
  if (k < 2) throw UsageError("k-fold needs k >= 2");
  if (static_cast<int>(ids.size()) < k) throw UsageError("fewer ids than folds");
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const int n = static_cast<int>(ids.size());
  std::vector<SplitPlan> plans;
  int start = 0;
  for (int f = 0; f < k; ++f) {
    const int size = n / k + (f < n % k ? 1 : 0);
    SplitPlan plan;
    plan.fold_index = f;
    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
      if (i >= start && i < start + size) {
        plan.test_ids.push_back(ids[static_cast<std::size_t>(i)]);
      } else {
        rest.push_back(ids[static_cast<std::size_t>(i)]);
      }
    }
    const auto n_val = static_cast<std::size_t>(std::lround(static_cast<double>(rest.size()) / 8.0));
    plan.val_ids.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
    plan.train_ids.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_val), rest.end());
    plans.push_back(std::move(plan));
    start += size;
  }
  return plans;
}

SplitPlan holdout_plan(std::vector<int> ids, std::uint64_t seed) {
  if (ids.size() < 3) throw UsageError("holdout split needs at least 3 ids");
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto n = static_cast<double>(ids.size());
  auto n_test = static_cast<std::size_t>(std::max(1L, std::lround(0.2 * n)));
  auto n_val = static_cast<std::size_t>(std::max(1L, std::lround(0.1 * n)));
  SplitPlan plan;
  plan.test_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  plan.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test),
                      ids.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  plan.train_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), ids.end());
  return plan;
}

Vec acf(const Vec& series, int max_lag) {
  if (max_lag < 0 || series.size() <= max_lag) throw UsageError("series must be longer than max_lag");
  const Vec c = series.array() - series.mean();
  const double c0 = c.squaredNorm();
  if (c0 == 0.0) throw MetricUndefined("autocorrelation of a constant series");
  const Eigen::Index n = c.size();
  Vec out(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) out[k] = c.head(n - k).dot(c.tail(n - k)) / c0;
  return out;
}

Vec pacf(const Vec& series, int max_lag) {
  const Vec r = acf(series, max_lag);
  Vec out = Vec::Zero(max_lag + 1);
  out[0] = 1.0;
  if (max_lag == 0) return out;
  // Durbin-Levinson: phi holds the AR(k) coefficients
  Vec phi = Vec::Zero(max_lag + 1);
  Vec prev = Vec::Zero(max_lag + 1);
  double v = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double num = r[k];
    for (int j = 1; j < k; ++j) num -= prev[j] * r[k - j];
    const double phikk = num / v;
    phi[k] = phikk;
    for (int j = 1; j < k; ++j) phi[j] = prev[j] - phikk * prev[k - j];
    v *= (1.0 - phikk * phikk);
    out[k] = phikk;
    prev = phi;
  }
  return out;
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Smape:
      return "SMAPE";
    case Metric::Rmse:
      return "RMSE";
    case Metric::Pearson:
      return "P.Corr";
  }
  return "?";
}

const ModelReport& EvalReport::model(const std::string& name) const {
  for (const auto& m : models) {
    if (m.model == name) return m;
  }
  throw UsageError("report has no model " + name);
}

namespace {

double metric_value(Metric m, const Vec& t, const Vec& p, const Vec& mask) {
  switch (m) {
    case Metric::Smape:
      return smape(t, p, mask);
    case Metric::Rmse:
      return rmse(t, p, mask);
    case Metric::Pearson:
      return pearson(t, p, mask);
  }
  return 0.0;
}

Cell reduce(const std::vector<double>& values) {
  Cell c;
  c.folds = static_cast<int>(values.size());
  if (values.empty()) {
    c.available = false;
    c.mean = c.std = std::nan("");
    return c;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  c.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - c.mean) * (v - c.mean);
  c.std = std::sqrt(sq / static_cast<double>(values.size()));
  return c;
}

}  // namespace

ModelReport assemble_model_report(const std::string& model, std::vector<FoldPredictions> folds) {
  if (folds.empty()) throw UsageError("report for " + model + " has no folds");
  std::sort(folds.begin(), folds.end(), [](const auto& a, const auto& b) { return a.fold < b.fold; });
  // values[metric][column] over folds
  std::array<std::array<std::vector<double>, kNumHi + 1>, kNumMetrics> values;
  for (const FoldPredictions& fold : folds) {
    Eigen::Index total = 0;
    for (const auto& s : fold.series) {
      if (s.truth.rows() != s.pred.rows() || s.truth.cols() != kNumHi || s.pred.cols() != kNumHi) {
        throw UsageError("series " + std::to_string(s.id) + " has mismatched truth/prediction shapes");
      }
      total += s.truth.rows();
    }
    Mat truth(total, kNumHi), pred(total, kNumHi);
    Vec mask(total);
    Eigen::Index r = 0;
    for (const auto& s : fold.series) {
      truth.middleRows(r, s.truth.rows()) = s.truth;
      pred.middleRows(r, s.pred.rows()) = s.pred;
      mask.segment(r, s.truth.rows()) = s.mask.size() ? s.mask : Vec(Vec::Ones(s.truth.rows()));
      r += s.truth.rows();
    }
    const Vec pooled_mask = mask.replicate(kNumHi, 1);
    const Vec pooled_truth = truth.reshaped();
    const Vec pooled_pred = pred.reshaped();
    for (int mi = 0; mi < kNumMetrics; ++mi) {
      const auto m = static_cast<Metric>(mi);
      for (int hi = 0; hi < kNumHi; ++hi) {
        try {
          values[mi][hi].push_back(metric_value(m, truth.col(hi), pred.col(hi), mask));
        } catch (const MetricUndefined&) {
        }
      }
      try {
        values[mi][kNumHi].push_back(metric_value(m, pooled_truth, pooled_pred, pooled_mask));
      } catch (const MetricUndefined&) {
      }
    }
  }
  ModelReport rep;
  rep.model = model;
  for (int mi = 0; mi < kNumMetrics; ++mi) {
    for (int c = 0; c <= kNumHi; ++c) rep.cells[mi][c] = reduce(values[mi][c]);
  }
  return rep;
}

EvalReport assemble_report(const std::map<std::string, std::vector<FoldPredictions>>& by_model) {
  EvalReport rep;
  for (const auto& [name, folds] : by_model) rep.models.push_back(assemble_model_report(name, folds));
  return rep;
}

namespace {
double display_scale(int metric) { return metric == static_cast<int>(Metric::Rmse) ? 1e3 : 1.0; }
}  // namespace

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "model,metric";
  for (auto name : kHiNames) out << ',' << name;
  out << ",Avg\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& m : models) {
    for (int mi = 0; mi < kNumMetrics; ++mi) {
      out << m.model << ',' << metric_name(static_cast<Metric>(mi)) << (mi == 1 ? "_x1e3" : "");
      for (int c = 0; c <= kNumHi; ++c) {
        const Cell& cell = m.cells[mi][c];
        if (!cell.available) {
          out << ",NA";
        } else {
          const double s = display_scale(mi);
          out << ',' << cell.mean * s << " +- " << cell.std * s;
          if (cell.folds < m.cells[0][c].folds) out << " *";
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["rmse_scale"] = 1e3;
  j["columns"] = nlohmann::json::array();
  for (auto name : kHiNames) j["columns"].push_back(std::string(name));
  j["columns"].push_back("Avg");
  for (const auto& m : models) {
    nlohmann::json jm;
    for (int mi = 0; mi < kNumMetrics; ++mi) {
      nlohmann::json cells = nlohmann::json::array();
      for (int c = 0; c <= kNumHi; ++c) {
        const Cell& cell = m.cells[mi][c];
        const double s = display_scale(mi);
        if (cell.available) {
          cells.push_back({{"mean", cell.mean * s}, {"std", cell.std * s}, {"folds", cell.folds}});
        } else {
          cells.push_back({{"mean", nullptr}, {"std", nullptr}, {"folds", 0}});
        }
      }
      jm[metric_name(static_cast<Metric>(mi))] = cells;
    }
    j["models"][m.model] = jm;
  }
  return j.dump(2);
}

}  // namespace turbohse::eval
