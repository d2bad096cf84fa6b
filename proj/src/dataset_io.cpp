#include "turbohse/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace turbohse::io {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 3> kSpeedNames = {"slow", "normal", "fast"};

const char* range_mode_name(RangeMode m) {
  return m == RangeMode::DatasetRange ? "DatasetRange" : "FixedFractionOfBaseline";
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Mat& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", vec_to_json(m.reshaped())}};
}

Mat mat_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw IoError("checkpoint tensor size mismatch");
  Mat m(rows, cols);
  m.reshaped() = Eigen::Map<const Vec>(data.data(), static_cast<Eigen::Index>(data.size()));
  return m;
}

json params_to_json(const learn::Params& p) {
  json a = json::array();
  for (const Mat& m : p) a.push_back(mat_to_json(m));
  return a;
}

learn::Params params_from_json(const json& j) {
  learn::Params p;
  for (const auto& m : j) p.push_back(mat_from_json(m));
  return p;
}

const char* activation_name(learn::Activation a) {
  switch (a) {
    case learn::Activation::Linear:
      return "linear";
    case learn::Activation::Softplus:
      return "softplus";
    case learn::Activation::Tanh:
      return "tanh";
  }
  return "?";
}

learn::Activation activation_from(const std::string& s) {
  if (s == "linear") return learn::Activation::Linear;
  if (s == "softplus") return learn::Activation::Softplus;
  if (s == "tanh") return learn::Activation::Tanh;
  throw IoError("unknown activation '" + s + "'");
}

json mlp_net_to_json(const learn::Mlp& net) {
  return {{"sizes", net.sizes()}, {"activation", activation_name(net.hidden_activation())},
          {"params", params_to_json(net.params())}};
}

learn::Mlp mlp_net_from_json(const json& j) {
  learn::Mlp net(j.at("sizes").get<std::vector<int>>(), activation_from(j.at("activation").get<std::string>()), 0);
  learn::Params p = params_from_json(j.at("params"));
  if (p.size() != net.params().size()) throw IoError("checkpoint layer count mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].rows() != net.params()[i].rows() || p[i].cols() != net.params()[i].cols()) {
      throw IoError("checkpoint layer shape mismatch");
    }
  }
  net.params() = std::move(p);
  return net;
}

void check_kind(const json& j, const char* kind) {
  if (j.value("kind", "") != kind) throw IoError(std::string("checkpoint is not a ") + kind + " model");
  if (j.value("format_version", 0) != kFormatVersion) throw IoError("checkpoint format version mismatch");
}

std::string states_file(int id) { return "states_" + std::to_string(id) + ".csv"; }
std::string sensors_file(int id, OperatingCondition oc) {
  return "sensors_" + std::to_string(id) + "_" + std::string(to_string(oc)) + ".csv";
}
std::string pred_file(int id) { return "pred_" + std::to_string(id) + ".csv"; }

bool owned_file(const std::string& name) {
  auto ends = [&](const char* s) {
    const std::string suffix(s);
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  auto starts = [&](const char* s) { return name.rfind(s, 0) == 0; };
  return name == "manifest.json" || name == "predictions.json" || name == "splits.json" ||
         ((starts("states_") || starts("sensors_") || starts("pred_")) && ends(".csv")) ||
         (starts("model_fold") && ends(".json"));
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

GenerationConfig config_from_json(const json& j) {
  reject_unknown(j, "", {"n_trajectories", "max_len", "ocs", "speed_params", "speed_policy", "maintenance",
                         "maint_interval", "jitter_sigma", "base_seed", "noise"});
  GenerationConfig cfg;
  if (j.contains("n_trajectories")) cfg.n_trajectories = get_as<int>(j["n_trajectories"], "n_trajectories");
  if (j.contains("max_len")) cfg.max_len = get_as<int>(j["max_len"], "max_len");
  if (j.contains("ocs")) {
    cfg.ocs.clear();
    for (const auto& name : get_as<std::vector<std::string>>(j["ocs"], "ocs")) {
      const auto oc = parse_oc(name);
      if (!oc) throw ConfigError("config key 'ocs' has unknown operating condition '" + name + "'");
      cfg.ocs.push_back(*oc);
    }
  }
  if (j.contains("speed_params")) {
    const json& sp = j["speed_params"];
    reject_unknown(sp, "speed_params", {"slow", "normal", "fast"});
    for (int s = 0; s < 3; ++s) {
      if (!sp.contains(kSpeedNames[s])) continue;
      const std::string where = std::string("speed_params.") + kSpeedNames[s];
      const json& e = sp[kSpeedNames[s]];
      reject_unknown(e, where, {"mu", "sigma"});
      if (e.contains("mu")) cfg.speed_params[s].mu = get_as<double>(e["mu"], where + ".mu");
      if (e.contains("sigma")) cfg.speed_params[s].sigma = get_as<double>(e["sigma"], where + ".sigma");
    }
  }
  if (j.contains("speed_policy")) {
    const json& sp = j["speed_policy"];
    reject_unknown(sp, "speed_policy", {"probs", "change_period"});
    if (sp.contains("change_period")) {
      cfg.speed_policy.change_period = get_as<int>(sp["change_period"], "speed_policy.change_period");
    }
    if (sp.contains("probs")) {
      if (!sp["probs"].is_object()) throw ConfigError("config key 'speed_policy.probs' must map indicator names");
      for (const auto& [name, value] : sp["probs"].items()) {
        const int idx = hi_index(name);
        if (idx < 0) throw ConfigError("unknown config key 'speed_policy.probs." + name + "'");
        const auto p = get_as<std::vector<double>>(value, "speed_policy.probs." + name);
        if (p.size() != 3) throw ConfigError("config key 'speed_policy.probs." + name + "' needs 3 probabilities");
        cfg.speed_policy.probs[idx] = {p[0], p[1], p[2]};
      }
    }
  }
  if (j.contains("maintenance")) cfg.maintenance = get_as<bool>(j["maintenance"], "maintenance");
  if (j.contains("maint_interval")) {
    const auto v = get_as<std::vector<int>>(j["maint_interval"], "maint_interval");
    if (v.size() != 2) throw ConfigError("config key 'maint_interval' needs [min, max]");
    cfg.maint_interval = {v[0], v[1]};
  }
  if (j.contains("jitter_sigma")) cfg.jitter_sigma = get_as<double>(j["jitter_sigma"], "jitter_sigma");
  if (j.contains("base_seed")) cfg.base_seed = get_as<std::uint64_t>(j["base_seed"], "base_seed");
  if (j.contains("noise")) {
    const json& n = j["noise"];
    reject_unknown(n, "noise", {"gamma", "range_mode", "baseline_fraction"});
    if (n.contains("gamma")) cfg.noise.gamma = get_as<double>(n["gamma"], "noise.gamma");
    if (n.contains("baseline_fraction")) {
      cfg.noise.baseline_fraction = get_as<double>(n["baseline_fraction"], "noise.baseline_fraction");
    }
    if (n.contains("range_mode")) {
      const auto mode = get_as<std::string>(n["range_mode"], "noise.range_mode");
      if (mode == "DatasetRange") {
        cfg.noise.range_mode = RangeMode::DatasetRange;
      } else if (mode == "FixedFractionOfBaseline") {
        cfg.noise.range_mode = RangeMode::FixedFractionOfBaseline;
      } else {
        throw ConfigError("config key 'noise.range_mode' has unknown value '" + mode + "'");
      }
    }
  }
  cfg.validate();
  return cfg;
}

json config_to_json(const GenerationConfig& cfg) {
  json j;
  j["n_trajectories"] = cfg.n_trajectories;
  j["max_len"] = cfg.max_len;
  j["ocs"] = json::array();
  for (auto oc : cfg.ocs) j["ocs"].push_back(std::string(to_string(oc)));
  for (int s = 0; s < 3; ++s) {
    j["speed_params"][kSpeedNames[s]] = {{"mu", cfg.speed_params[s].mu}, {"sigma", cfg.speed_params[s].sigma}};
  }
  for (int i = 0; i < kNumHi; ++i) j["speed_policy"]["probs"][std::string(kHiNames[i])] = cfg.speed_policy.probs[i];
  j["speed_policy"]["change_period"] = cfg.speed_policy.change_period;
  j["maintenance"] = cfg.maintenance;
  j["maint_interval"] = {cfg.maint_interval.first, cfg.maint_interval.second};
  j["jitter_sigma"] = cfg.jitter_sigma;
  j["base_seed"] = cfg.base_seed;
  j["noise"] = {{"gamma", cfg.noise.gamma},
                {"range_mode", range_mode_name(cfg.noise.range_mode)},
                {"baseline_fraction", cfg.noise.baseline_fraction}};
  return j;
}

GenerationConfig load_config(const fs::path& path) {
  json j;
  try {
    j = read_json(path);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json surrogate_to_json(const SurrogateConstants& c) {
  json j;
  j["a1_rows"] = json::array();
  for (int r = 0; r < kNumChannels; ++r) j["a1_rows"].push_back(vec_to_json(c.a1.row(r).transpose()));
  for (int k = 0; k < kNumOc; ++k) {
    const std::string oc(to_string(static_cast<OperatingCondition>(k)));
    j["shift_mix"][oc] = c.shift_mix[k];
    j["baselines"][oc] = vec_to_json(c.baselines[k]);
  }
  j["kappa_nl"] = c.kappa_nl;
  j["sensor_channels"] = json::array();
  for (auto name : kChannelNames) j["sensor_channels"].push_back(std::string(name));
  j["health_indicators"] = json::array();
  for (auto name : kHiNames) j["health_indicators"].push_back(std::string(name));
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return json::parse(in);
}

void prepare_output_dir(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir)) {
      if (!force) throw IoError("output directory " + dir.string() + " is not empty (use --force)");
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && owned_file(entry.path().filename().string())) fs::remove(entry.path());
      }
    }
  } else {
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Mat& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) throw UsageError("CSV header/column mismatch");
  std::string buf;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) buf += ',';
    buf += header[c];
  }
  buf += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) buf += ',';
      buf += format_double(values(r, c));
    }
    buf += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << buf;
  if (!out) throw IoError("write failed for " + path.string());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  std::vector<double> data;
  Eigen::Index rows = 0;
  const auto cols = static_cast<Eigen::Index>(t.header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Eigen::Index c = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma) {
        const std::string cell(p, comma);
        if (cell == "nan" || cell == "-nan") {
          v = std::nan("");
        } else {
          throw IoError(path.string() + ": bad number '" + cell + "' on row " + std::to_string(rows + 1));
        }
      }
      data.push_back(v);
      ++c;
      p = comma + 1;
      if (comma == end) break;
    }
    if (c != cols) throw IoError(path.string() + ": row " + std::to_string(rows + 1) + " has wrong column count");
    ++rows;
  }
  t.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(),
                                                                                                      rows, cols);
  return t;
}

void write_dataset(const Dataset& ds, const fs::path& dir, bool force) {
  prepare_output_dir(dir, force);
  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["base_seed"] = ds.config.base_seed;
  manifest["config"] = config_to_json(ds.config);
  manifest["surrogate"] = surrogate_to_json(SurrogateConstants::shipped());
  for (const auto& [oc, delta] : ds.deltas) manifest["deltas"][std::string(to_string(oc))] = vec_to_json(delta);
  manifest["trajectories"] = json::array();

  std::vector<std::string> state_header{"t"};
  for (auto n : kHiNames) state_header.emplace_back(n);
  state_header.emplace_back("maintenance");
  std::vector<std::string> sensor_header{"t"};
  for (auto n : kChannelNames) sensor_header.emplace_back(n);
  for (auto n : kChannelNames) sensor_header.push_back(std::string(n) + "_clean");

  for (const Trajectory& t : ds.trajectories) {
    json entry{{"id", t.id},
               {"length", t.length()},
               {"terminated_early", t.terminated_early},
               {"states_file", states_file(t.id)}};
    entry["maintenance"] = json::array();
    for (const auto& ev : t.maintenance) entry["maintenance"].push_back({{"t", ev.t}, {"lambdas", ev.lambdas}});
    entry["sensors_files"] = json::object();

    Mat states(t.length(), kNumHi + 2);
    states.col(0) = Vec::LinSpaced(t.length(), 0, t.length() - 1);
    states.middleCols<kNumHi>(1) = t.states_matrix();
    for (int s = 0; s < t.length(); ++s) states(s, kNumHi + 1) = t.is_maintenance_step(s) ? 1.0 : 0.0;
    write_csv(dir / states_file(t.id), state_header, states);

    for (OperatingCondition oc : t.ocs) {
      Mat sensors(t.length(), 1 + 2 * kNumChannels);
      sensors.col(0) = states.col(0);
      sensors.middleCols<kNumChannels>(1) = t.sensors_noisy.at(oc);
      sensors.middleCols<kNumChannels>(1 + kNumChannels) = t.sensors_clean.at(oc);
      write_csv(dir / sensors_file(t.id, oc), sensor_header, sensors);
      entry["sensors_files"][std::string(to_string(oc))] = sensors_file(t.id, oc);
    }
    manifest["trajectories"].push_back(entry);
  }
  write_json(dir / "manifest.json", manifest);
}

Dataset read_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw IoError("no manifest.json in " + dir.string());
  const json manifest = read_json(manifest_path);
  if (manifest.value("format_version", 0) != kFormatVersion) {
    throw IoError("dataset format version mismatch (expected " + std::to_string(kFormatVersion) + ")");
  }
  Dataset ds;
  ds.config = config_from_json(manifest.at("config"));
  for (const auto& [name, value] : manifest.at("deltas").items()) {
    const auto oc = parse_oc(name);
    if (!oc) throw IoError("manifest has unknown OC '" + name + "'");
    const auto v = value.get<std::vector<double>>();
    if (v.size() != kNumChannels) throw IoError("manifest delta for " + name + " has wrong size");
    ds.deltas[*oc] = Eigen::Map<const Eigen::Matrix<double, kNumChannels, 1>>(v.data());
  }
  for (const json& entry : manifest.at("trajectories")) {
    Trajectory t;
    t.id = entry.at("id").get<int>();
    t.ocs = ds.config.ocs;
    t.terminated_early = entry.at("terminated_early").get<bool>();
    for (const json& ev : entry.at("maintenance")) {
      t.maintenance.push_back({ev.at("t").get<int>(), ev.at("lambdas").get<std::array<double, kNumHi>>()});
    }
    const fs::path sp = dir / entry.at("states_file").get<std::string>();
    if (!fs::exists(sp)) throw IoError("manifest lists missing file " + sp.string());
    const CsvTable states = read_csv(sp);
    const int len = entry.at("length").get<int>();
    if (states.values.rows() != len || states.values.cols() != kNumHi + 2) {
      throw IoError(sp.string() + " does not match the manifest");
    }
    for (int s = 0; s < len; ++s) t.states.push_back(HealthState::from(states.values.row(s).segment(1, kNumHi).transpose()));
    for (OperatingCondition oc : t.ocs) {
      const fs::path file = dir / entry.at("sensors_files").at(std::string(to_string(oc))).get<std::string>();
      if (!fs::exists(file)) throw IoError("manifest lists missing file " + file.string());
      const CsvTable sensors = read_csv(file);
      if (sensors.values.rows() != len || sensors.values.cols() != 1 + 2 * kNumChannels) {
        throw IoError(file.string() + " does not match the manifest");
      }
      t.sensors_noisy[oc] = sensors.values.middleCols(1, kNumChannels);
      t.sensors_clean[oc] = sensors.values.middleCols(1 + kNumChannels, kNumChannels);
    }
    ds.trajectories.push_back(std::move(t));
  }
  return ds;
}

void write_predictions(const PredictionSet& set, const fs::path& dir, bool force) {
  prepare_output_dir(dir, force);
  json meta{{"format_version", kFormatVersion}, {"model", set.model}, {"oc_mode", set.oc_mode}};
  meta["ids"] = json::array();
  std::vector<std::string> header{"t"};
  for (auto n : kHiNames) header.emplace_back(n);
  const bool with_std = !set.std_devs.empty();
  if (with_std) {
    for (auto n : kHiNames) header.push_back("std_" + std::string(n));
  }
  for (const auto& [id, est] : set.estimates) {
    Mat out(est.rows(), header.size());
    out.col(0) = Vec::LinSpaced(est.rows(), 0, static_cast<double>(est.rows() - 1));
    out.middleCols<kNumHi>(1) = est;
    if (with_std) out.middleCols<kNumHi>(1 + kNumHi) = set.std_devs.at(id);
    write_csv(dir / pred_file(id), header, out);
    meta["ids"].push_back(id);
  }
  if (!set.folds.empty()) {
    meta["folds"] = json::array();
    for (std::size_t f = 0; f < set.folds.size(); ++f) meta["folds"].push_back({{"fold", f}, {"test_ids", set.folds[f]}});
  }
  write_json(dir / "predictions.json", meta);
}

PredictionSet read_predictions(const fs::path& dir) {
  const fs::path meta_path = dir / "predictions.json";
  if (!fs::exists(meta_path)) throw IoError("no predictions.json in " + dir.string());
  const json meta = read_json(meta_path);
  if (meta.value("format_version", 0) != kFormatVersion) throw IoError("prediction format version mismatch in " + dir.string());
  PredictionSet set;
  set.model = meta.at("model").get<std::string>();
  set.oc_mode = meta.value("oc_mode", "");
  for (int id : meta.at("ids").get<std::vector<int>>()) {
    const fs::path file = dir / pred_file(id);
    if (!fs::exists(file)) throw IoError("missing prediction file " + file.string());
    const CsvTable t = read_csv(file);
    if (t.values.cols() != 1 + kNumHi && t.values.cols() != 1 + 2 * kNumHi) {
      throw IoError(file.string() + " has unexpected columns");
    }
    set.estimates[id] = t.values.middleCols(1, kNumHi);
    if (t.values.cols() == 1 + 2 * kNumHi) set.std_devs[id] = t.values.middleCols(1 + kNumHi, kNumHi);
  }
  if (meta.contains("folds")) {
    for (const json& f : meta["folds"]) set.folds.push_back(f.at("test_ids").get<std::vector<int>>());
  }
  return set;
}

json to_json(const learn::Scaler& s) {
  return {{"mode", s.mode() == learn::ScalerMode::Standard ? "standard" : "minmax"},
          {"offset", vec_to_json(s.offset())},
          {"scale", vec_to_json(s.scale())}};
}

learn::Scaler scaler_from_json(const json& j) {
  const auto mode = j.at("mode").get<std::string>() == "standard" ? learn::ScalerMode::Standard : learn::ScalerMode::MinMax;
  const auto off = j.at("offset").get<std::vector<double>>();
  const auto sc = j.at("scale").get<std::vector<double>>();
  return learn::Scaler::from_stats(mode, Eigen::Map<const Vec>(off.data(), static_cast<Eigen::Index>(off.size())),
                                   Eigen::Map<const Vec>(sc.data(), static_cast<Eigen::Index>(sc.size())));
}

json to_json(const learn::MlpRegressor& m) {
  return {{"kind", "mlp"},
          {"format_version", kFormatVersion},
          {"x_scaler", to_json(m.x_scaler)},
          {"y_scaler", to_json(m.y_scaler)},
          {"net", mlp_net_to_json(m.net)}};
}

json to_json(const learn::GruRegressor& m) {
  return {{"kind", "gru"},
          {"format_version", kFormatVersion},
          {"input_dim", m.net.input_dim()},
          {"hidden_dim", m.net.hidden_dim()},
          {"output_dim", m.net.output_dim()},
          {"x_scaler", to_json(m.x_scaler)},
          {"y_scaler", to_json(m.y_scaler)},
          {"params", params_to_json(m.net.params())}};
}

json to_json(const learn::Autoencoder& m) {
  return {{"kind", "autoencoder"},
          {"format_version", kFormatVersion},
          {"scaler", to_json(m.scaler)},
          {"encoder", mlp_net_to_json(m.encoder)},
          {"decoder", mlp_net_to_json(m.decoder)}};
}

learn::MlpRegressor mlp_from_json(const json& j) {
  check_kind(j, "mlp");
  return {scaler_from_json(j.at("x_scaler")), scaler_from_json(j.at("y_scaler")), mlp_net_from_json(j.at("net"))};
}

learn::GruRegressor gru_from_json(const json& j) {
  check_kind(j, "gru");
  learn::GruRegressor m{scaler_from_json(j.at("x_scaler")), scaler_from_json(j.at("y_scaler")),
                        learn::Gru(j.at("input_dim").get<int>(), j.at("hidden_dim").get<int>(),
                                   j.at("output_dim").get<int>(), 0)};
  learn::Params p = params_from_json(j.at("params"));
  if (p.size() != m.net.params().size()) throw IoError("GRU checkpoint parameter count mismatch");
  m.net.params() = std::move(p);
  return m;
}

learn::Autoencoder autoencoder_from_json(const json& j) {
  check_kind(j, "autoencoder");
  return {scaler_from_json(j.at("scaler")), mlp_net_from_json(j.at("encoder")), mlp_net_from_json(j.at("decoder"))};
}

}  // namespace turbohse::io
