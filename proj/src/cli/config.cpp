#include "apneakit/cli/config.hpp"

#include <fstream>

#include "apneakit/nn/weights_io.hpp"
#include "apneakit/text.hpp"

namespace apneakit::cli {

namespace {

[[noreturn]] void bad_config(const std::filesystem::path& path, size_t line_no,
                             const std::string& what) {
  fail(ErrorCode::config_error,
       path.string() + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

void load_config_file(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::config_error, "cannot open config " + path.string());

  bool saw_version = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const size_t eq = view.find('=');
    if (eq == std::string_view::npos)
      bad_config(path, line_no, "expected key = value");
    const std::string key{trim(view.substr(0, eq))};
    const std::string value{trim(view.substr(eq + 1))};

    const auto int_value = [&]() -> long long {
      auto v = parse_int(value);
      if (!v) bad_config(path, line_no, "bad integer for " + key);
      return *v;
    };
    const auto double_value = [&]() -> double {
      auto v = parse_double(value);
      if (!v) bad_config(path, line_no, "bad number for " + key);
      return *v;
    };

    if (key == "config_version") {
      if (int_value() != kConfigVersion)
        bad_config(path, line_no, "unsupported config_version " + value);
      saw_version = true;
    } else if (key == "data_dir") {
      config.data_dir = value;
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else if (key == "model_sleep") {
      config.model_sleep = value;
    } else if (key == "model_resp") {
      config.model_resp = value;
    } else if (key == "epochs") {
      config.epochs = int(int_value());
    } else if (key == "batch") {
      config.batch = int(int_value());
    } else if (key == "lr") {
      config.lr = double_value();
    } else if (key == "seed") {
      config.seed = uint64_t(int_value());
    } else if (key == "workers") {
      config.workers = int(int_value());
    } else if (key == "event_mode") {
      if (value == "per_minute")
        config.event_mode = EventCountMode::per_minute;
      else if (value == "events")
        config.event_mode = EventCountMode::events;
      else
        bad_config(path, line_no, "event_mode must be per_minute or events");
    } else if (key == "val_percent") {
      const auto v = int_value();
      if (v < 0 || v > 100)
        bad_config(path, line_no, "val_percent outside [0, 100]");
      config.val_percent = int(v);
    } else if (key == "split_salt") {
      config.split_salt = value;
    } else {
      bad_config(path, line_no, "unknown key '" + key + "'");
    }
  }
  if (!saw_version)
    fail(ErrorCode::config_error,
         path.string() + ": missing config_version key");
}

bool subject_in_validation(const std::string& subject_id, int val_percent,
                           const std::string& salt) {
  const std::string keyed = subject_id + "\x1f" + salt;
  const uint64_t h = nn::fnv1a64(keyed.data(), keyed.size());
  return int(h % 100) < val_percent;
}

}  // namespace apneakit::cli
