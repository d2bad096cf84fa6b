#include "turbohse/experiment.hpp"

#include <algorithm>
#include <mutex>

namespace turbohse {

OcSelection OcSelection::parse(const std::string& text) {
  if (text == "stacked") return stacked();
  const std::string prefix = "single:";
  if (text.rfind(prefix, 0) == 0) {
    if (auto oc = parse_oc(text.substr(prefix.size()))) return single(*oc);
  }
  throw UsageError("OC mode must be 'stacked' or 'single:<Cruise|Takeoff|Climb1|Climb2>', got '" + text + "'");
}

std::string OcSelection::label() const {
  if (ocs.size() == kNumOc) return "stacked";
  std::string out = "single:";
  out += to_string(ocs.front());
  return out;
}

const Trajectory& find_trajectory(const Dataset& ds, int id) {
  for (const auto& t : ds.trajectories) {
    if (t.id == id) return t;
  }
  throw UsageError("dataset has no trajectory " + std::to_string(id));
}

learn::TabularData tabular(const Dataset& ds, const std::vector<int>& ids, const OcSelection& sel) {
  Eigen::Index rows = 0;
  for (int id : ids) rows += find_trajectory(ds, id).length();
  learn::TabularData out{Mat(rows, sel.channels()), Mat(rows, kNumHi)};
  Eigen::Index r = 0;
  for (int id : ids) {
    const Trajectory& t = find_trajectory(ds, id);
    out.x.middleRows(r, t.length()) = t.stacked_sensors(true, sel.ocs);
    out.y.middleRows(r, t.length()) = t.states_matrix();
    r += t.length();
  }
  return out;
}

learn::SequenceData sequences(const Dataset& ds, const std::vector<int>& ids, const OcSelection& sel) {
  learn::SequenceData out;
  for (int id : ids) {
    const Trajectory& t = find_trajectory(ds, id);
    out.x.push_back(t.stacked_sensors(true, sel.ocs));
    out.y.push_back(t.states_matrix());
  }
  return out;
}

ukf::UkfConfig default_ukf_config(const Dataset& ds, const OcSelection& sel) {
  ukf::UkfConfig cfg;
  Vec delta(sel.channels());
  for (std::size_t k = 0; k < sel.ocs.size(); ++k) {
    const auto it = ds.deltas.find(sel.ocs[k]);
    if (it == ds.deltas.end()) throw UsageError("dataset has no noise range for " + std::string(to_string(sel.ocs[k])));
    delta.segment<kNumChannels>(kNumChannels * static_cast<Eigen::Index>(k)) = it->second;
  }
  cfg.r_diag = ukf::build_r_from_noise(delta, ds.config.noise.gamma);
  return cfg;
}

UkfRun run_ukf(const Dataset& ds, const std::vector<int>& ids, const OcSelection& sel, const ukf::UkfConfig& cfg) {
  std::vector<ukf::FilterResult> results(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    const Trajectory& t = find_trajectory(ds, ids[i]);
    results[i] = ukf::filter_trajectory(t.stacked_sensors(true, sel.ocs), sel.ocs, cfg);
  });
  UkfRun run;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!results[i].ok) {
      run.failures[ids[i]] = results[i].failure;
      continue;
    }
    run.estimates[ids[i]] = std::move(results[i].estimates);
    run.std_devs[ids[i]] = std::move(results[i].std_devs);
  }
  return run;
}

namespace {

template <typename Model, typename Train, typename Predict>
FoldRuns run_folds(const std::vector<eval::SplitPlan>& plans, std::vector<Model>* models, Train train,
                   Predict predict) {
  FoldRuns runs(plans.size());
  std::vector<Model> trained(plans.size());
  parallel_for(plans.size(), [&](std::size_t f) {
    trained[f] = train(plans[f]);
    for (int id : plans[f].test_ids) runs[f][id] = predict(trained[f], id);
  });
  if (models != nullptr) *models = std::move(trained);
  return runs;
}

}  // namespace

FoldRuns cv_mlp(const Dataset& ds, const std::vector<eval::SplitPlan>& plans, const ExperimentConfig& cfg,
                std::vector<learn::MlpRegressor>* models) {
  return run_folds(
      plans, models,
      [&](const eval::SplitPlan& plan) {
        return learn::mlp_train(tabular(ds, plan.train_ids, cfg.sel), tabular(ds, plan.val_ids, cfg.sel), cfg.mlp,
                                cfg.mlp_train);
      },
      [&](const learn::MlpRegressor& m, int id) {
        return m.predict(find_trajectory(ds, id).stacked_sensors(true, cfg.sel.ocs));
      });
}

FoldRuns cv_ridge(const Dataset& ds, const std::vector<eval::SplitPlan>& plans, const ExperimentConfig& cfg) {
  return run_folds<learn::RidgeRegressor>(
      plans, nullptr,
      [&](const eval::SplitPlan& plan) { return learn::ridge_train(tabular(ds, plan.train_ids, cfg.sel), cfg.ridge_l2); },
      [&](const learn::RidgeRegressor& m, int id) {
        return m.predict(find_trajectory(ds, id).stacked_sensors(true, cfg.sel.ocs));
      });
}

FoldRuns cv_gru(const Dataset& ds, const std::vector<eval::SplitPlan>& plans, const ExperimentConfig& cfg,
                std::vector<learn::GruRegressor>* models) {
  return run_folds(
      plans, models,
      [&](const eval::SplitPlan& plan) {
        return learn::gru_train(sequences(ds, plan.train_ids, cfg.sel), sequences(ds, plan.val_ids, cfg.sel), cfg.gru,
                                cfg.gru_train);
      },
      [&](const learn::GruRegressor& m, int id) {
        return m.predict(find_trajectory(ds, id).stacked_sensors(true, cfg.sel.ocs));
      });
}

FoldRuns cv_ae_probe(const Dataset& ds, const std::vector<eval::SplitPlan>& plans, const ExperimentConfig& cfg,
                     std::vector<learn::Autoencoder>* encoders) {
  struct Fitted {
    learn::Autoencoder ae;
    learn::LatentProbe probe;
  };
  std::vector<Fitted> fitted;
  auto runs = run_folds(
      plans, &fitted,
      [&](const eval::SplitPlan& plan) {
        const learn::TabularData train = tabular(ds, plan.train_ids, cfg.sel);
        const learn::TabularData val = tabular(ds, plan.val_ids, cfg.sel);
        Fitted f;
        f.ae = learn::ae_train(train.x, val.x, cfg.ae, cfg.ae_train);
        f.probe = learn::probe_latents(f.ae, train.x, train.y, cfg.ridge_l2);
        return f;
      },
      [&](const Fitted& f, int id) {
        return f.probe.predict(f.ae, find_trajectory(ds, id).stacked_sensors(true, cfg.sel.ocs));
      });
  if (encoders != nullptr) {
    encoders->clear();
    for (auto& f : fitted) encoders->push_back(std::move(f.ae));
  }
  return runs;
}

FoldRuns split_by_fold(const Predictions& all, const std::vector<eval::SplitPlan>& plans) {
  FoldRuns runs(plans.size());
  for (std::size_t f = 0; f < plans.size(); ++f) {
    for (int id : plans[f].test_ids) {
      const auto it = all.find(id);
      if (it == all.end()) throw UsageError("missing prediction for trajectory " + std::to_string(id));
      runs[f][id] = it->second;
    }
  }
  return runs;
}

std::vector<eval::FoldPredictions> with_truth(const Dataset& ds, const std::vector<eval::SplitPlan>& plans,
                                              const FoldRuns& runs) {
  if (runs.size() != plans.size()) throw UsageError("fold count mismatch");
  std::vector<eval::FoldPredictions> out;
  for (std::size_t f = 0; f < plans.size(); ++f) {
    eval::FoldPredictions fp;
    fp.fold = plans[f].fold_index;
    for (int id : plans[f].test_ids) {
      const auto it = runs[f].find(id);
      if (it == runs[f].end()) throw UsageError("missing prediction for trajectory " + std::to_string(id));
      const Trajectory& t = find_trajectory(ds, id);
      if (it->second.rows() != t.length()) {
        throw UsageError("prediction length mismatch for trajectory " + std::to_string(id));
      }
      fp.series.push_back({id, t.states_matrix(), it->second, {}});
    }
    out.push_back(std::move(fp));
  }
  return out;
}

}  // namespace turbohse
