#pragma once

#include <filesystem>
#include <string>

#include "apneakit/ahi.hpp"

namespace apneakit::cli {

// Flat `key = value` config file; every key here has a CLI override. The
// training defaults are epochs 20, batch 32, lr 1e-3.
struct RunConfig {
  std::filesystem::path data_dir;
  std::filesystem::path out_dir = "out";
  std::filesystem::path model_sleep;  // defaults to <out>/model_sleep.apnw
  std::filesystem::path model_resp;   // defaults to <out>/model_resp.apnw

  int epochs = 20;
  int batch = 32;
  double lr = 1e-3;
  uint64_t seed = 0;
  int workers = 0;  // 0 = hardware default

  EventCountMode event_mode = EventCountMode::per_minute;

  // subject-wise split: subjects hash into [0,100); below val_percent -> val
  int val_percent = 20;
  std::string split_salt;

  // preprocess also writes flattened per-segment feature CSVs for debugging
  bool dump_features = false;

  std::filesystem::path sleep_model_path() const {
    return model_sleep.empty() ? out_dir / "model_sleep.apnw" : model_sleep;
  }
  std::filesystem::path resp_model_path() const {
    return model_resp.empty() ? out_dir / "model_resp.apnw" : model_resp;
  }
  std::filesystem::path cache_dir() const { return out_dir / "cache"; }
};

inline constexpr int kConfigVersion = 1;

// Parses the file into `config`. Unknown keys and a missing/mismatched
// `config_version` are config errors.
void load_config_file(const std::filesystem::path& path, RunConfig& config);

// Subject-wise train/validation split by salted id hash.
bool subject_in_validation(const std::string& subject_id, int val_percent,
                           const std::string& salt);

}  // namespace apneakit::cli
