#include "molab/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "molab/training.hpp"

namespace molab {

double relative_l2(const MatrixXd& pred, const MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw DimensionError("prediction and target grids differ");
  return (pred - target).norm() / (target.norm() + kRelativeL2Floor);
}

double relative_l2(const SolutionField& pred, const SolutionField& target) {
  return relative_l2(pred.values, target.values);
}

namespace {
void finish(EvalReport& r, std::chrono::steady_clock::time_point start) {
  double sum = 0.0;
  for (double e : r.errors) sum += e;
  r.mean_error = r.errors.empty() ? 0.0 : sum / static_cast<double>(r.errors.size());
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

EvalReport start_report(const DatasetSplit& split, std::string architecture) {
  EvalReport r;
  r.family = split.family;
  r.mode = split.mode;
  r.architecture = std::move(architecture);
  r.errors.reserve(split.samples.size());
  return r;
}
}  // namespace

EvalReport evaluate(const FieldPredictor& predict, const DatasetSplit& split, std::string architecture) {
  const auto start = std::chrono::steady_clock::now();
  EvalReport r = start_report(split, std::move(architecture));
  for (const auto& s : split.samples) {
    r.errors.push_back(relative_l2(predict(s), s.target));
    r.alpha_seeds.push_back(s.alpha_seed);
    r.ic_seeds.push_back(s.ic_seed);
  }
  finish(r, start);
  return r;
}

namespace {
VectorXd alpha_input(const ModelState& model, const OperatorSample& s) {
  return model.spec.kind == ArchitectureKind::DeepONet ? VectorXd(0) : s.alpha.values;
}
}  // namespace

SolutionField predict_field(const ModelState& model, const OperatorSample& sample) {
  const MatrixXd features = trunk_features(model, grid::eval_points());
  return SolutionField::from_flat(predict_with_features(model, alpha_input(model, sample), sample.u_sensors, features));
}

EvalReport evaluate(const ModelState& model, const DatasetSplit& split) {
  const auto start = std::chrono::steady_clock::now();
  check_model(model);
  check_compatible(model, split);
  EvalReport r = start_report(split, std::string(to_string(model.spec.kind)));
  const MatrixXd features = trunk_features(model, grid::eval_points());
  for (const auto& s : split.samples) {
    const VectorXd flat = predict_with_features(model, alpha_input(model, s), s.u_sensors, features);
    r.errors.push_back(relative_l2(SolutionField::from_flat(flat), s.target));
    r.alpha_seeds.push_back(s.alpha_seed);
    r.ic_seeds.push_back(s.ic_seed);
  }
  finish(r, start);
  return r;
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << "sample_index,alpha_seed,ic_seed,rel_l2\n";
  char buf[128];
  for (std::size_t i = 0; i < report.errors.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%llu,%llu,%.17g\n", i,
                  static_cast<unsigned long long>(report.alpha_seeds.at(i)),
                  static_cast<unsigned long long>(report.ic_seeds.at(i)), report.errors[i]);
    f << buf;
  }
  if (!f) throw Error("write to '" + path + "' failed");
}

EvalReport read_report_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(f, line) || line != "sample_index,alpha_seed,ic_seed,rel_l2")
    throw FormatError("report '" + path + "' has an unexpected header");
  EvalReport r;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    unsigned long long idx = 0, aseed = 0, iseed = 0;
    double err = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%llu,%lf", &idx, &aseed, &iseed, &err) != 4 ||
        idx != r.errors.size())
      throw FormatError("report '" + path + "' line " + std::to_string(lineno) + " is malformed");
    r.errors.push_back(err);
    r.alpha_seeds.push_back(aseed);
    r.ic_seeds.push_back(iseed);
  }
  double sum = 0.0;
  for (double e : r.errors) sum += e;
  r.mean_error = r.errors.empty() ? 0.0 : sum / static_cast<double>(r.errors.size());
  return r;
}

void export_error_map(const SolutionField& pred, const SolutionField& target, const std::string& csv_path,
                      const std::string& pgm_path) {
  const MatrixXd err = (pred.values - target.values).cwiseAbs();
  {
    std::ofstream f(csv_path);
    if (!f) throw Error("cannot open '" + csv_path + "' for writing");
    char buf[32];
    for (Eigen::Index j = 0; j < err.rows(); ++j) {
      for (Eigen::Index i = 0; i < err.cols(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", err(j, i));
        f << (i ? "," : "") << buf;
      }
      f << '\n';
    }
    if (!f) throw Error("write to '" + csv_path + "' failed");
  }
  std::ofstream g(pgm_path, std::ios::binary);
  if (!g) throw Error("cannot open '" + pgm_path + "' for writing");
  g << "P5\n" << err.cols() << ' ' << err.rows() << "\n255\n";
  const double peak = err.maxCoeff();
  for (Eigen::Index j = 0; j < err.rows(); ++j)
    for (Eigen::Index i = 0; i < err.cols(); ++i) {
      const long v = peak > 0 ? std::lround(255.0 * err(j, i) / peak) : 0;
      g.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
  if (!g) throw Error("write to '" + pgm_path + "' failed");
}

}  // namespace molab
