#pragma once

// Glue between generated datasets, the estimators and the evaluation harness:
// feature extraction per OC mode and cross-validated prediction runs.

#include "turbohse/evaluation.hpp"
#include "turbohse/generator.hpp"
#include "turbohse/learn/estimators.hpp"
#include "turbohse/srukf.hpp"

#include <map>
#include <string>
#include <vector>

namespace turbohse {

/// Which sensors a model sees: one OC (7 channels) or all four stacked (28).
struct OcSelection {
  std::vector<OperatingCondition> ocs{kAllOcs.begin(), kAllOcs.end()};

  static OcSelection stacked() { return {}; }
  static OcSelection single(OperatingCondition oc) { return {{oc}}; }
  /// "stacked" or "single:<OC name>"; throws UsageError otherwise.
  static OcSelection parse(const std::string& text);
  std::string label() const;
  int channels() const { return kNumChannels * static_cast<int>(ocs.size()); }
};

/// Trajectory id -> L x 10 estimates.
using Predictions = std::map<int, Mat>;

const Trajectory& find_trajectory(const Dataset& ds, int id);

learn::TabularData tabular(const Dataset& ds, const std::vector<int>& ids, const OcSelection& sel);
learn::SequenceData sequences(const Dataset& ds, const std::vector<int>& ids, const OcSelection& sel);

/// Filter defaults: unit scaling, Q = 1e-7 I, x0 = 0, S0 = 1e-3 I and R
/// derived from the dataset noise ranges.
ukf::UkfConfig default_ukf_config(const Dataset& ds, const OcSelection& sel);

struct UkfRun {
  Predictions estimates;
  Predictions std_devs;
  std::map<int, std::string> failures;
};
UkfRun run_ukf(const Dataset& ds, const std::vector<int>& ids, const OcSelection& sel, const ukf::UkfConfig& cfg);

struct ExperimentConfig {
  OcSelection sel;
  int folds = 5;
  std::uint64_t split_seed = 0;
  learn::MlpConfig mlp;
  learn::TrainConfig mlp_train{.lr = 1e-3, .epochs = 40, .batch_size = 64, .seed = 1};
  learn::GruConfig gru;
  learn::TrainConfig gru_train{.lr = 2e-3, .epochs = 60, .batch_size = 64, .seed = 2, .bptt_window = 20};
  learn::AeConfig ae;
  learn::TrainConfig ae_train{.lr = 1e-3, .epochs = 30, .batch_size = 64, .seed = 3};
  double ridge_l2 = 1e-6;
};

/// Test-fold predictions, one map per fold in plan order.
using FoldRuns = std::vector<Predictions>;

FoldRuns cv_mlp(const Dataset& ds, const std::vector<eval::SplitPlan>& plans, const ExperimentConfig& cfg,
                std::vector<learn::MlpRegressor>* models = nullptr);
FoldRuns cv_ridge(const Dataset& ds, const std::vector<eval::SplitPlan>& plans, const ExperimentConfig& cfg);
FoldRuns cv_gru(const Dataset& ds, const std::vector<eval::SplitPlan>& plans, const ExperimentConfig& cfg,
                std::vector<learn::GruRegressor>* models = nullptr);
/// Autoencoder trained on sensors of the train ids, then a ridge probe on
/// the frozen codes.
FoldRuns cv_ae_probe(const Dataset& ds, const std::vector<eval::SplitPlan>& plans, const ExperimentConfig& cfg,
                     std::vector<learn::Autoencoder>* encoders = nullptr);

/// Groups whole-dataset predictions (e.g. filter output) by test fold.
FoldRuns split_by_fold(const Predictions& all, const std::vector<eval::SplitPlan>& plans);

/// Attaches ground truth to fold predictions for report assembly.
std::vector<eval::FoldPredictions> with_truth(const Dataset& ds, const std::vector<eval::SplitPlan>& plans,
                                              const FoldRuns& runs);

}  // namespace turbohse
