#pragma once

// Relative L2 evaluation on the 32 x 64 grid.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "molab/architectures.hpp"
#include "molab/dataset.hpp"

namespace molab {

inline constexpr double kRelativeL2Floor = 1e-5;

/// ||pred - target|| / (||target|| + 1e-5) over all grid values.
double relative_l2(const SolutionField& pred, const SolutionField& target);
double relative_l2(const MatrixXd& pred, const MatrixXd& target);

struct EvalReport {
  PdeFamily family = PdeFamily::ConservationLaw;
  SampleMode mode = SampleMode::In;
  std::string architecture;
  std::vector<double> errors;
  std::vector<std::uint64_t> alpha_seeds;
  std::vector<std::uint64_t> ic_seeds;
  double mean_error = 0.0;
  double runtime_seconds = 0.0;
};

using FieldPredictor = std::function<SolutionField(const OperatorSample&)>;

EvalReport evaluate(const FieldPredictor& predict, const DatasetSplit& split, std::string architecture = "custom");

/// Trunk features on the grid are computed once; per sample only the
/// coefficient side is evaluated.
EvalReport evaluate(const ModelState& model, const DatasetSplit& split);

SolutionField predict_field(const ModelState& model, const OperatorSample& sample);

/// CSV with columns sample_index, alpha_seed, ic_seed, rel_l2.
void write_report_csv(const EvalReport& report, const std::string& path);
EvalReport read_report_csv(const std::string& path);

/// |pred - target| as a 32 x 64 CSV and a binary PGM scaled to max 255.
void export_error_map(const SolutionField& pred, const SolutionField& target, const std::string& csv_path,
                      const std::string& pgm_path);

}  // namespace molab
