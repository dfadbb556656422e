#pragma once

// Command implementations shared by the CLI and the tests. Every artifact is
// written with a "<path>.manifest" of key=value lines (no timestamps).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "molab/config.hpp"
#include "molab/dataset.hpp"
#include "molab/evaluation.hpp"
#include "molab/theory.hpp"

namespace molab {

inline constexpr const char* kToolVersion = "molab 1.0.0";

using Manifest = std::vector<std::pair<std::string, std::string>>;
void write_manifest(const std::string& artifact_path, const Manifest& entries);
std::string manifest_path(const std::string& artifact_path);

struct GenDataArgs {
  PdeFamily family = PdeFamily::ParametricWave;
  SampleMode mode = SampleMode::In;
  SplitRole role = SplitRole::Train;
  int n_alpha = 1;
  int n_ic = 1;
  std::uint64_t seed = 0;
  int nx_fine = 512;
  int threads = 1;
  std::string out;
};
DatasetSplit run_gen_data(const GenDataArgs& args, std::ostream& log);

struct TrainArgs {
  ExperimentConfig config;  // architecture, scale, seed and TrainConfig fields are used
  std::string data;
  std::string out;
};
ModelState run_train(const TrainArgs& args, std::ostream& log);

struct EvalArgs {
  std::string model;
  std::string data;
  std::string report;
  std::optional<std::string> error_map_prefix;  // writes <prefix>.csv/.pgm for the worst sample
};
EvalReport run_eval(const EvalArgs& args, std::ostream& log);

struct ScalingArgs {
  std::string regime = "single-ff";  // single-ff | single-fcf | multi
  int d_U = 1;
  int d_V = 1;
  std::optional<int> d_W;
  double epsilon = 0.5;
  std::optional<std::string> constants_path;
  std::optional<std::string> csv_out;
};
SizeReport run_scaling(const ScalingArgs& args, std::ostream& out);

/// key=value file with keys C, C_prime, C_double_prime, C_delta, C_zeta, gamma_U, gamma_W.
ScalingConstants load_scaling_constants(const std::string& path);

void run_inspect_data(const std::string& path, std::ostream& out);

/// gen-data (train and test) -> train -> eval, all paths from the config.
EvalReport run_pipeline(const ExperimentConfig& config, std::ostream& log);

/// Dispatches a command name using only the config. Returns the exit status and
/// prints "error: <cause>" on one line to err on failure.
int run(std::string_view command, const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace molab
