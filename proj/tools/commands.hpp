#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tvsvm/trainer.hpp"

namespace tvsvm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kDataError = 3,
  kNumericalFailure = 4,
};

// Runs one command line (argv[0] is the program name) and returns its exit
// code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Exposed for tests and the Python bindings.
std::string config_to_json(const TrainConfig& config);
// Applies the keys of a config document (or of the "config" section of a
// manifest) on top of `base`. Unknown keys are rejected.
TrainConfig config_from_json(const std::string& text, TrainConfig base = {});
std::string sha256_file(const std::string& path);

}  // namespace tvsvm::cli
