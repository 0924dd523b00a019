#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "apneakit/cli/commands.hpp"

namespace {

// Errors print one machine-parseable line: `error: <code>: <message>`.
int run(int argc, char** argv) {
  CLI::App app{"apneakit - overnight ECG/SpO2 screening toolkit"};
  app.require_subcommand(1);

  apneakit::cli::RunConfig config;
  std::string config_path;
  std::string data_dir, out_dir, model_sleep, model_resp;
  long long seed = -1;
  int workers = -1, epochs = -1, batch = -1;
  double lr = -1.0;
  std::string event_mode;

  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--data", data_dir, "data root of subject directories");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "training / shuffle seed");
  app.add_option("--workers", workers, "worker thread count (0 = auto)");
  app.add_option("--model-sleep", model_sleep, "sleep model weights path");
  app.add_option("--model-resp", model_resp, "respiration model weights path");
  app.add_option("--event-mode", event_mode,
                 "event counting: per_minute or events");

  auto* cmd_preprocess =
      app.add_subcommand("preprocess", "segment, filter, and cache features");
  bool dump_features = false;
  cmd_preprocess->add_flag("--dump-features", dump_features,
                           "also write flattened per-segment feature CSVs");
  auto* cmd_train = app.add_subcommand("train", "train a classifier");
  std::string task;
  cmd_train->add_option("--task", task, "sleep or resp")->required();
  cmd_train->add_option("--epochs", epochs, "training epochs");
  cmd_train->add_option("--batch", batch, "batch size");
  cmd_train->add_option("--lr", lr, "learning rate");
  auto* cmd_predict =
      app.add_subcommand("predict", "score one subject's night");
  std::string subject;
  cmd_predict->add_option("--subject", subject, "subject id")->required();
  auto* cmd_evaluate =
      app.add_subcommand("evaluate", "metrics and plots against annotations");
  auto* cmd_report = app.add_subcommand("report", "summarize saved reports");

  // let global flags appear after the subcommand name as well
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: config_error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (!config_path.empty())
      apneakit::cli::load_config_file(config_path, config);
    if (!data_dir.empty()) config.data_dir = data_dir;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!model_sleep.empty()) config.model_sleep = model_sleep;
    if (!model_resp.empty()) config.model_resp = model_resp;
    if (seed >= 0) config.seed = uint64_t(seed);
    if (workers >= 0) config.workers = workers;
    if (epochs >= 0) config.epochs = epochs;
    if (batch >= 0) config.batch = batch;
    if (lr >= 0) config.lr = lr;
    if (!event_mode.empty()) {
      if (event_mode == "per_minute")
        config.event_mode = apneakit::EventCountMode::per_minute;
      else if (event_mode == "events")
        config.event_mode = apneakit::EventCountMode::events;
      else
        apneakit::fail(apneakit::ErrorCode::config_error,
                       "--event-mode must be per_minute or events");
    }

    if (cmd_preprocess->parsed()) {
      config.dump_features = dump_features;
      return apneakit::cli::cmd_preprocess(config, std::cout);
    }
    if (cmd_train->parsed())
      return apneakit::cli::cmd_train(config, task, std::cout);
    if (cmd_predict->parsed())
      return apneakit::cli::cmd_predict(config, subject, std::cout);
    if (cmd_evaluate->parsed())
      return apneakit::cli::cmd_evaluate(config, std::cout);
    if (cmd_report->parsed())
      return apneakit::cli::cmd_report(config, std::cout);
  } catch (const apneakit::Error& e) {
    std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
    return apneakit::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
