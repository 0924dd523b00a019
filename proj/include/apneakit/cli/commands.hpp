#pragma once

#include <ostream>
#include <string>

#include "apneakit/cli/cache.hpp"
#include "apneakit/cli/config.hpp"

namespace apneakit::cli {

// Each command returns the process exit code and reports through `out`
// (errors are thrown as apneakit::Error and rendered by the CLI shell).
int cmd_preprocess(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, const std::string& task,
              std::ostream& out);
int cmd_predict(const RunConfig& config, const std::string& subject,
                std::ostream& out);
int cmd_evaluate(const RunConfig& config, std::ostream& out);
int cmd_report(const RunConfig& config, std::ostream& out);

}  // namespace apneakit::cli
