#include "turbohse/cli.hpp"

#include "turbohse/dataset_io.hpp"
#include "turbohse/experiment.hpp"
#include "turbohse/svg.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace turbohse {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fold_file(std::size_t f) { return "model_fold" + std::to_string(f) + ".json"; }

std::vector<int> dataset_ids(const Dataset& ds) {
  std::vector<int> ids;
  for (const auto& t : ds.trajectories) ids.push_back(t.id);
  return ids;
}

std::vector<int> parse_his(const std::vector<std::string>& names) {
  std::vector<int> out;
  if (names.empty()) {
    for (int i = 0; i < kNumHi; ++i) out.push_back(i);
    return out;
  }
  for (const auto& n : names) {
    const int idx = hi_index(n);
    if (idx < 0) throw UsageError("unknown health indicator '" + n + "'");
    out.push_back(idx);
  }
  return out;
}

json plans_to_json(const std::vector<eval::SplitPlan>& plans, int k, std::uint64_t seed, const std::string& oc_mode) {
  json j{{"format_version", io::kFormatVersion}, {"k", k}, {"seed", seed}, {"oc_mode", oc_mode}};
  j["folds"] = json::array();
  for (const auto& p : plans) {
    j["folds"].push_back({{"fold", p.fold_index}, {"train", p.train_ids}, {"val", p.val_ids}, {"test", p.test_ids}});
  }
  return j;
}

std::vector<eval::SplitPlan> plans_from_json(const json& j) {
  std::vector<eval::SplitPlan> plans;
  for (const auto& f : j.at("folds")) {
    eval::SplitPlan p;
    p.fold_index = f.at("fold").get<int>();
    p.train_ids = f.at("train").get<std::vector<int>>();
    p.val_ids = f.at("val").get<std::vector<int>>();
    p.test_ids = f.at("test").get<std::vector<int>>();
    plans.push_back(std::move(p));
  }
  return plans;
}

io::PredictionSet merge_folds(const std::string& model, const OcSelection& sel, const FoldRuns& runs,
                              const std::vector<eval::SplitPlan>& plans) {
  io::PredictionSet set{model, sel.label(), {}, {}, {}};
  for (std::size_t f = 0; f < runs.size(); ++f) {
    for (const auto& [id, est] : runs[f]) set.estimates[id] = est;
    set.folds.push_back(plans[f].test_ids);
  }
  return set;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

// ------------------------------------------------------------------ generate

struct GenerateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

void cmd_generate(const GenerateArgs& a, std::ostream& out) {
  GenerationConfig cfg = a.config.empty() ? GenerationConfig{} : io::load_config(a.config);
  if (a.seed) cfg.base_seed = *a.seed;
  cfg.validate();
  // refuse before spending time on generation
  if (!a.force && fs::exists(a.out) && (!fs::is_directory(a.out) || !fs::is_empty(a.out))) {
    throw IoError("output directory " + a.out + " is not empty (use --force)");
  }
  const Dataset ds = generate_dataset(cfg);
  io::write_dataset(ds, a.out, a.force);
  int early = 0;
  for (const auto& t : ds.trajectories) early += t.terminated_early ? 1 : 0;
  out << "wrote " << ds.trajectories.size() << " trajectories to " << a.out << " (" << early
      << " ended at a bound)\n";
}

// ------------------------------------------------------------------ filter

struct FilterArgs {
  std::string dataset, oc = "stacked", out;
  bool force = false;
};

bool cmd_filter(const FilterArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset ds = io::read_dataset(a.dataset);
  const OcSelection sel = OcSelection::parse(a.oc);
  const UkfRun run = run_ukf(ds, dataset_ids(ds), sel, default_ukf_config(ds, sel));
  io::write_predictions({"ukf", sel.label(), run.estimates, run.std_devs, {}}, a.out, a.force);
  for (const auto& [id, why] : run.failures) err << "trajectory " << id << ": filter failed: " << why << "\n";
  out << "filtered " << run.estimates.size() << " trajectories (" << sel.label() << ") into " << a.out << "\n";
  return run.failures.empty();
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string dataset, model, oc = "stacked", out;
  int k = 5;
  std::uint64_t seed = 0;
  std::optional<int> epochs;
  std::optional<double> lr;
  bool force = false;
};

void cmd_train(const TrainArgs& a, std::ostream& out) {
  const Dataset ds = io::read_dataset(a.dataset);
  ExperimentConfig cfg;
  cfg.sel = OcSelection::parse(a.oc);
  cfg.folds = a.k;
  cfg.split_seed = a.seed;
  for (learn::TrainConfig* t : {&cfg.mlp_train, &cfg.gru_train, &cfg.ae_train}) {
    if (a.epochs) t->epochs = *a.epochs;
    if (a.lr) t->lr = *a.lr;
  }
  const auto plans = eval::kfold_plan(dataset_ids(ds), a.k, a.seed);
  io::prepare_output_dir(a.out, a.force);
  const fs::path dir = a.out;

  if (a.model == "mlp") {
    std::vector<learn::MlpRegressor> models;
    const FoldRuns runs = cv_mlp(ds, plans, cfg, &models);
    io::write_predictions(merge_folds("mlp", cfg.sel, runs, plans), dir, true);
    for (std::size_t f = 0; f < models.size(); ++f) io::write_json(dir / fold_file(f), io::to_json(models[f]));
  } else if (a.model == "gru") {
    std::vector<learn::GruRegressor> models;
    const FoldRuns runs = cv_gru(ds, plans, cfg, &models);
    io::write_predictions(merge_folds("gru", cfg.sel, runs, plans), dir, true);
    for (std::size_t f = 0; f < models.size(); ++f) io::write_json(dir / fold_file(f), io::to_json(models[f]));
  } else if (a.model == "ridge") {
    io::write_predictions(merge_folds("ridge", cfg.sel, cv_ridge(ds, plans, cfg), plans), dir, true);
  } else if (a.model == "ae") {
    // the encoder only ever sees sensor rows; `probe` attaches indicators later
    std::vector<learn::Autoencoder> encoders(plans.size());
    parallel_for(plans.size(), [&](std::size_t f) {
      encoders[f] = learn::ae_train(tabular(ds, plans[f].train_ids, cfg.sel).x,
                                    tabular(ds, plans[f].val_ids, cfg.sel).x, cfg.ae, cfg.ae_train);
    });
    for (std::size_t f = 0; f < encoders.size(); ++f) io::write_json(dir / fold_file(f), io::to_json(encoders[f]));
  } else {
    throw UsageError("--model must be mlp, gru, ridge or ae");
  }
  // after write_predictions, which clears previous outputs
  io::write_json(dir / "splits.json", plans_to_json(plans, a.k, a.seed, cfg.sel.label()));
  out << "trained " << a.model << " on " << plans.size() << " folds into " << a.out << "\n";
}

// ------------------------------------------------------------------ probe

struct ProbeArgs {
  std::string dataset, encoder, out;
  double l2 = 1e-6;
  bool force = false;
};

void cmd_probe(const ProbeArgs& a, std::ostream& out) {
  const Dataset ds = io::read_dataset(a.dataset);
  const fs::path enc_dir = a.encoder;
  if (!fs::exists(enc_dir / "splits.json")) throw IoError("no splits.json in encoder directory " + a.encoder);
  const json splits = io::read_json(enc_dir / "splits.json");
  const auto plans = plans_from_json(splits);
  const OcSelection sel = OcSelection::parse(splits.at("oc_mode").get<std::string>());
  io::prepare_output_dir(a.out, a.force);

  FoldRuns runs(plans.size());
  for (std::size_t f = 0; f < plans.size(); ++f) {
    const fs::path ckpt = enc_dir / fold_file(f);
    if (!fs::exists(ckpt)) throw IoError("missing encoder checkpoint " + ckpt.string());
    const learn::Autoencoder ae = io::autoencoder_from_json(io::read_json(ckpt));
    const auto hash = learn::params_hash(ae.encoder.params());
    const learn::TabularData train = tabular(ds, plans[f].train_ids, sel);
    const learn::LatentProbe probe = learn::probe_latents(ae, train.x, train.y, a.l2);
    for (int id : plans[f].test_ids) runs[f][id] = probe.predict(ae, find_trajectory(ds, id).stacked_sensors(true, sel.ocs));
    if (learn::params_hash(ae.encoder.params()) != hash) throw NumericalError("encoder parameters changed while probing");
  }
  io::write_predictions(merge_folds("ae_probe", sel, runs, plans), a.out, true);
  io::write_json(fs::path(a.out) / "splits.json", splits);
  out << "probed " << plans.size() << " frozen encoders into " << a.out << "\n";
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  std::string dataset, report;
  std::vector<std::string> preds;
  int k = 5;
  std::uint64_t seed = 0;
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Dataset ds = io::read_dataset(a.dataset);
  const std::set<int> known = [&] {
    const auto ids = dataset_ids(ds);
    return std::set<int>(ids.begin(), ids.end());
  }();
  const auto default_plans = eval::kfold_plan(dataset_ids(ds), a.k, a.seed);

  std::map<std::string, std::vector<eval::FoldPredictions>> by_model;
  for (const auto& dir : a.preds) {
    const io::PredictionSet set = io::read_predictions(dir);
    for (const auto& [id, est] : set.estimates) {
      if (!known.count(id)) throw UsageError(dir + ": prediction for trajectory " + std::to_string(id) + " not in dataset");
    }
    std::vector<eval::SplitPlan> plans = default_plans;
    if (!set.folds.empty()) {
      plans.clear();
      for (std::size_t f = 0; f < set.folds.size(); ++f) {
        eval::SplitPlan p;
        p.fold_index = static_cast<int>(f);
        p.test_ids = set.folds[f];
        plans.push_back(std::move(p));
      }
    }
    std::string name = set.model.empty() ? fs::path(dir).filename().string() : set.model;
    if (by_model.count(name)) name += "@" + dir;
    try {
      by_model[name] = with_truth(ds, plans, split_by_fold(set.estimates, plans));
    } catch (const UsageError& e) {
      throw UsageError(dir + ": " + e.what());
    }
  }
  const eval::EvalReport report = eval::assemble_report(by_model);
  const std::string csv = report.to_csv();
  write_text(a.report, csv);
  fs::path json_path = a.report;
  json_path.replace_extension(".json");
  if (json_path == fs::path(a.report)) json_path += ".json";
  write_text(json_path, report.to_json());
  out << csv;
}

// ------------------------------------------------------------------ analyze

struct AnalyzeArgs {
  std::string dataset, what, out;
  std::vector<std::string> his;
  int max_lag = 20;
};

void cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const Dataset ds = io::read_dataset(a.dataset);
  const std::vector<int> his = parse_his(a.his);
  std::ostringstream csv;
  csv.precision(17);

  if (a.what == "acf" || a.what == "pacf") {
    if (a.max_lag < 1) throw UsageError("--max-lag must be positive");
    Mat sum = Mat::Zero(a.max_lag + 1, static_cast<Eigen::Index>(his.size()));
    int used = 0;
    for (const auto& t : ds.trajectories) {
      if (t.length() <= a.max_lag + 1) continue;
      const Mat x = t.states_matrix();
      for (std::size_t k = 0; k < his.size(); ++k) {
        const Vec s = x.col(his[k]);
        sum.col(static_cast<Eigen::Index>(k)) += a.what == "acf" ? eval::acf(s, a.max_lag) : eval::pacf(s, a.max_lag);
      }
      ++used;
    }
    if (used == 0) throw UsageError("no trajectory is longer than max lag + 1");
    sum /= used;
    csv << "lag";
    for (int h : his) csv << ',' << kHiNames[h];
    csv << '\n';
    for (Eigen::Index l = 0; l <= a.max_lag; ++l) {
      csv << l;
      for (Eigen::Index k = 0; k < sum.cols(); ++k) csv << ',' << io::format_double(sum(l, k));
      csv << '\n';
    }
  } else if (a.what == "distributions") {
    csv << "indicator,count,min,p05,p25,median,p75,p95,max,mean,std\n";
    for (int h : his) {
      std::vector<double> v;
      for (const auto& t : ds.trajectories)
        for (const auto& s : t.states) v.push_back(s[h]);
      if (v.empty()) continue;
      std::sort(v.begin(), v.end());
      auto q = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
      };
      const Eigen::Map<const Vec> m(v.data(), static_cast<Eigen::Index>(v.size()));
      const double mean = m.mean();
      const double sd = std::sqrt((m.array() - mean).square().mean());
      csv << kHiNames[h] << ',' << v.size();
      for (double x : {v.front(), q(0.05), q(0.25), q(0.5), q(0.75), q(0.95), v.back(), mean, sd}) {
        csv << ',' << io::format_double(x);
      }
      csv << '\n';
    }
  } else {
    throw UsageError("--what must be acf, pacf or distributions");
  }
  if (a.out.empty()) {
    out << csv.str();
  } else {
    write_text(a.out, csv.str());
  }
}

// ------------------------------------------------------------------ plot

struct PlotArgs {
  std::string dataset, out;
  int trajectory = 0;
  std::vector<std::string> his, preds;
};

void cmd_plot(const PlotArgs& a, std::ostream& out) {
  const Dataset ds = io::read_dataset(a.dataset);
  const Trajectory& t = find_trajectory(ds, a.trajectory);
  const std::vector<int> his = parse_his(a.his);
  std::vector<std::pair<std::string, Mat>> models;
  for (const auto& dir : a.preds) {
    const io::PredictionSet set = io::read_predictions(dir);
    const auto it = set.estimates.find(t.id);
    if (it == set.estimates.end()) {
      throw UsageError(dir + " has no prediction for trajectory " + std::to_string(t.id));
    }
    if (it->second.rows() != t.length()) throw UsageError(dir + ": prediction length does not match trajectory");
    models.emplace_back(set.model, it->second);
  }

  svg::Chart chart;
  chart.title = "trajectory " + std::to_string(t.id) + ": true health indicators vs predictions";
  const Mat truth = t.states_matrix();
  for (int h : his) {
    svg::Panel p{std::string(kHiNames[h]), {}};
    p.series.push_back({"truth", truth.col(h), false, "#000"});
    for (const auto& [name, est] : models) p.series.push_back({name, est.col(h), true, ""});
    chart.panels.push_back(std::move(p));
  }
  for (const auto& ev : t.maintenance) chart.bands.push_back(ev.t);
  write_text(a.out, svg::render(chart));
  out << "wrote " << a.out << " (" << chart.panels.size() << " panels, " << chart.bands.size()
      << " maintenance bands)\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Turbofan health-state estimation toolkit", "turbohse"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Simulate degradation trajectories and sensor data");
  g->add_option("--config", gen.config, "Generation config (JSON)")->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Dataset directory")->required();
  g->add_option("--seed", gen.seed, "Base seed (overrides the config)");
  g->add_flag("--force", gen.force, "Replace an existing dataset");

  FilterArgs fil;
  auto* f = app.add_subcommand("filter", "Run the square-root UKF on every trajectory");
  f->add_option("--dataset", fil.dataset)->required();
  f->add_option("--oc", fil.oc, "stacked or single:<OC>");
  f->add_option("--out", fil.out)->required();
  f->add_flag("--force", fil.force);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Cross-validated training; writes checkpoints and test-fold predictions");
  t->add_option("--dataset", tr.dataset)->required();
  t->add_option("--model", tr.model)->required()->check(CLI::IsMember({"mlp", "gru", "ae", "ridge"}));
  t->add_option("--oc", tr.oc, "stacked or single:<OC>");
  t->add_option("--out", tr.out)->required();
  t->add_option("--k", tr.k, "Folds")->check(CLI::Range(2, 1000));
  t->add_option("--seed", tr.seed, "Split seed");
  t->add_option("--epochs", tr.epochs, "Override epoch budget");
  t->add_option("--lr", tr.lr, "Override learning rate");
  t->add_flag("--force", tr.force);

  ProbeArgs pr;
  auto* p = app.add_subcommand("probe", "Linear probe on frozen autoencoder latents");
  p->add_option("--dataset", pr.dataset)->required();
  p->add_option("--encoder", pr.encoder, "Directory written by train --model ae")->required();
  p->add_option("--out", pr.out)->required();
  p->add_option("--l2", pr.l2);
  p->add_flag("--force", pr.force);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "SMAPE / RMSE / Pearson report across folds");
  e->add_option("--dataset", ev.dataset)->required();
  e->add_option("--pred", ev.preds, "Prediction directories")->required();
  e->add_option("--report", ev.report, "CSV report path (JSON written alongside)")->required();
  e->add_option("--k", ev.k, "Folds for predictions without fold info")->check(CLI::Range(2, 1000));
  e->add_option("--seed", ev.seed);

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Autocorrelation and distribution summaries of the indicators");
  a->add_option("--dataset", an.dataset)->required();
  a->add_option("--what", an.what)->required()->check(CLI::IsMember({"acf", "pacf", "distributions"}));
  a->add_option("--hi", an.his, "Indicator names")->delimiter(',');
  a->add_option("--max-lag", an.max_lag);
  a->add_option("--out", an.out, "CSV path (default stdout)");

  PlotArgs pl;
  auto* pt = app.add_subcommand("plot", "SVG overlay of truth and predictions");
  pt->add_option("--dataset", pl.dataset)->required();
  pt->add_option("--trajectory", pl.trajectory)->required();
  pt->add_option("--hi", pl.his, "Indicator names")->delimiter(',');
  pt->add_option("--pred", pl.preds, "Prediction directories");
  pt->add_option("--out", pl.out)->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(std::move(rev));
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err) == 0 ? 0 : 2;
  }

  try {
    bool ok = true;
    if (*g) cmd_generate(gen, out);
    if (*f) ok = cmd_filter(fil, out, err);
    if (*t) cmd_train(tr, out);
    if (*p) cmd_probe(pr, out);
    if (*e) cmd_eval(ev, out);
    if (*a) cmd_analyze(an, out);
    if (*pt) cmd_plot(pl, out);
    return ok ? 0 : 1;
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace turbohse
