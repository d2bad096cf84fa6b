#pragma once

// On-disk formats. A dataset directory holds
//   manifest.json               provenance, config echo, noise ranges, index
//   states_<id>.csv             t, 10 indicator columns, maintenance flag
//   sensors_<id>_<oc>.csv       t, 7 noisy channels, 7 clean channels
// A prediction directory holds predictions.json plus pred_<id>.csv
// (t, 10 estimate columns, optionally 10 std_<name> columns).

#include "turbohse/experiment.hpp"
#include "turbohse/generator.hpp"
#include "turbohse/learn/estimators.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace turbohse::io {

namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

/// Full-precision decimal (17 significant digits).
std::string format_double(double v);

/// Throws ConfigError naming any unknown or ill-typed key.
GenerationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const GenerationConfig& cfg);
GenerationConfig load_config(const fs::path& path);

nlohmann::json surrogate_to_json(const SurrogateConstants& c);

/// Refuses an existing non-empty directory unless force is set, in which
/// case the previous dataset files are replaced.
void write_dataset(const Dataset& ds, const fs::path& dir, bool force);
Dataset read_dataset(const fs::path& dir);

struct PredictionSet {
  std::string model;
  std::string oc_mode;
  Predictions estimates;
  Predictions std_devs;  // empty when the model has no uncertainty output
  /// fold index -> test ids, when the predictions come from cross-validation
  std::vector<std::vector<int>> folds;
};

void write_predictions(const PredictionSet& set, const fs::path& dir, bool force);
PredictionSet read_predictions(const fs::path& dir);

/// Minimal CSV table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  Mat values;
};
CsvTable read_csv(const fs::path& path);
void write_csv(const fs::path& path, const std::vector<std::string>& header, const Mat& values);

// Checkpoints: self-describing JSON with shapes, scaler statistics and parameters.
nlohmann::json to_json(const learn::Scaler& s);
learn::Scaler scaler_from_json(const nlohmann::json& j);
nlohmann::json to_json(const learn::MlpRegressor& m);
nlohmann::json to_json(const learn::GruRegressor& m);
nlohmann::json to_json(const learn::Autoencoder& m);
learn::MlpRegressor mlp_from_json(const nlohmann::json& j);
learn::GruRegressor gru_from_json(const nlohmann::json& j);
learn::Autoencoder autoencoder_from_json(const nlohmann::json& j);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

/// Ensures dir is absent or empty (or clears it when force is set).
void prepare_output_dir(const fs::path& dir, bool force);

}  // namespace turbohse::io
