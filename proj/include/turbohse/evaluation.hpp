#pragma once

#include "turbohse/common.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace turbohse::eval {

// Metrics take an optional 0/1 mask; an empty mask selects every step.

/// mean of 2|p - t| / (|t| + |p| + 1e-8). Throws MetricUndefined on an empty mask.
double smape(const Vec& truth, const Vec& pred, const Vec& mask = {});
double rmse(const Vec& truth, const Vec& pred, const Vec& mask = {});
/// Sample correlation. Throws MetricUndefined if either series is constant.
double pearson(const Vec& truth, const Vec& pred, const Vec& mask = {});

struct SplitPlan {
  std::vector<int> train_ids;
  std::vector<int> val_ids;
  std::vector<int> test_ids;
  int fold_index = 0;
};

/// k test folds over shuffled ids; the rest of each fold splits 7:1 into
/// train:val (val count = round(remaining / 8)).
std::vector<SplitPlan> kfold_plan(std::vector<int> ids, int k = 5, std::uint64_t seed = 0);

/// Single 70/10/20 split.
SplitPlan holdout_plan(std::vector<int> ids, std::uint64_t seed = 0);

/// Biased autocorrelation for lags 0..max_lag.
Vec acf(const Vec& series, int max_lag);
/// Partial autocorrelation (Durbin-Levinson) for lags 0..max_lag; lag 0 is 1.
Vec pacf(const Vec& series, int max_lag);

enum class Metric { Smape = 0, Rmse = 1, Pearson = 2 };
inline constexpr int kNumMetrics = 3;
const char* metric_name(Metric m);

/// One test trajectory: truth and prediction are L x 10.
struct SeriesPrediction {
  int id = 0;
  Mat truth;
  Mat pred;
  Vec mask;  // empty = all steps
};

struct FoldPredictions {
  int fold = 0;
  std::vector<SeriesPrediction> series;
};

struct Cell {
  double mean = 0.0;
  double std = 0.0;
  int folds = 0;          // folds where the metric was defined
  bool available = true;  // false when no fold produced a value
};

struct ModelReport {
  std::string model;
  /// cells[metric][hi]; hi == 10 is the pooled average column.
  std::array<std::array<Cell, kNumHi + 1>, kNumMetrics> cells;

  const Cell& avg(Metric m) const { return cells[static_cast<int>(m)][kNumHi]; }
  const Cell& at(Metric m, int hi) const { return cells[static_cast<int>(m)][hi]; }
};

struct EvalReport {
  std::vector<ModelReport> models;

  const ModelReport& model(const std::string& name) const;
  /// Rows model x metric, columns per indicator then Avg; RMSE shown x1e3.
  std::string to_csv() const;
  std::string to_json() const;
};

/// Per fold, per indicator metrics over the concatenated test series; the
/// Avg column pools every indicator's residuals. Cells are mean and
/// population std across folds (folds are reduced in fold-index order).
ModelReport assemble_model_report(const std::string& model, std::vector<FoldPredictions> folds);
EvalReport assemble_report(const std::map<std::string, std::vector<FoldPredictions>>& by_model);

}  // namespace turbohse::eval
