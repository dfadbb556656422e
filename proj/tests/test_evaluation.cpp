#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "molab/evaluation.hpp"

using namespace molab;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("molab_eval_" + name)).string();
}

DatasetSplit random_split(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0, 1);
  DatasetSplit s;
  s.family = PdeFamily::KleinGordon;
  s.n_alpha = n;
  s.n_ic = 1;
  for (int i = 0; i < n; ++i) {
    OperatorSample smp;
    smp.alpha = {PdeFamily::KleinGordon, VectorXd::Ones(3)};
    smp.u_sensors = VectorXd::Zero(64);
    smp.alpha_seed = i;
    smp.ic_seed = 100 + i;
    for (int j = 0; j < 32; ++j)
      for (int k = 0; k < 64; ++k) smp.target.values(j, k) = N(rng);
    s.samples.push_back(smp);
  }
  return s;
}

SolutionField scaled(const SolutionField& f, double c) {
  SolutionField out;
  out.values = c * f.values;
  return out;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("relative L2 closed forms") {
  SolutionField t;
  t.values(0, 0) = 1.0;
  CHECK(relative_l2(t, t) == 0.0);
  CHECK(relative_l2(SolutionField{}, t) == doctest::Approx(1.0 / (1.0 + 1e-5)).epsilon(1e-15));
  t.values(0, 0) = 3.0;
  CHECK(relative_l2(scaled(t, 2.0), t) == doctest::Approx(3.0 / (3.0 + 1e-5)).epsilon(1e-15));
  CHECK_THROWS_AS(relative_l2(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 3)), DimensionError);
}

TEST_CASE("oracle and zero predictors") {
  const auto split = random_split(6, 1);
  const auto oracle = evaluate([](const OperatorSample& s) { return s.target; }, split, "oracle");
  CHECK(oracle.mean_error == 0.0);
  CHECK(oracle.errors.size() == 6);
  const auto zero = evaluate([](const OperatorSample&) { return SolutionField{}; }, split, "zero");
  CHECK(zero.mean_error == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("mean is permutation invariant") {
  auto split = random_split(9, 2);
  auto half = [](const OperatorSample& s) { return scaled(s.target, 0.5 + 0.01 * s.ic_seed); };
  const double before = evaluate(half, split).mean_error;
  std::mt19937_64 rng(3);
  std::shuffle(split.samples.begin(), split.samples.end(), rng);
  CHECK(std::abs(evaluate(half, split).mean_error - before) < 1e-12);
}

TEST_CASE("model evaluation uses cached trunk features consistently") {
  ArchitectureSpec s;
  s.kind = ArchitectureKind::MNO;
  s.trunk_count = s.branch_count = 3;
  s.param_net_count = 2;
  s.alpha_dim = 3;
  s.trunk = {2, 8};
  s.branch = {2, 8};
  s.param = {2, 4};
  const auto model = init_model(s, 5);
  auto split = random_split(3, 4);
  for (auto& smp : split.samples) smp.u_sensors = VectorXd::LinSpaced(64, -1, 1) * (smp.ic_seed % 7);
  const auto fast = evaluate(model, split);
  const MatrixXd pts = grid::eval_points();
  const auto slow = evaluate(
      [&](const OperatorSample& smp) {
        VectorXd flat(pts.cols());
        for (Eigen::Index c = 0; c < pts.cols(); ++c)
          flat(c) = evaluate_point(model, smp.alpha.values, smp.u_sensors, pts.col(c));
        return SolutionField::from_flat(flat);
      },
      split);
  for (std::size_t i = 0; i < fast.errors.size(); ++i)
    CHECK(fast.errors[i] == doctest::Approx(slow.errors[i]).epsilon(1e-12));

  auto wrong = split;
  wrong.family = PdeFamily::ConservationLaw;
  for (auto& smp : wrong.samples) smp.alpha = {PdeFamily::ConservationLaw, VectorXd::Ones(4)};
  CHECK_THROWS_AS(evaluate(model, wrong), DimensionError);
}

TEST_CASE("report CSV round-trip") {
  const auto split = random_split(4, 7);
  const auto rep = evaluate([](const OperatorSample& s) { return scaled(s.target, 0.9); }, split);
  const auto path = temp_path("report.csv");
  write_report_csv(rep, path);
  const auto back = read_report_csv(path);
  CHECK(back.errors == rep.errors);
  CHECK(back.alpha_seeds == rep.alpha_seeds);
  CHECK(back.ic_seeds == rep.ic_seeds);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "sample_index,alpha_seed,ic_seed,rel_l2");
  std::filesystem::remove(path);
}

TEST_CASE("error map export") {
  SolutionField t, p;
  t.values.setRandom();
  p = t;
  const auto csv = temp_path("map.csv"), pgm = temp_path("map.pgm");
  export_error_map(p, t, csv, pgm);
  {
    std::ifstream f(csv);
    std::string line;
    int rows = 0;
    while (std::getline(f, line)) {
      ++rows;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) CHECK(std::stod(cell) == 0.0);
    }
    CHECK(rows == 32);
  }
  p.values(4, 9) += 0.25;
  export_error_map(p, t, csv, pgm);
  {
    std::ifstream f(csv);
    std::string line, cell;
    int nonzero = 0;
    while (std::getline(f, line)) {
      std::stringstream ss(line);
      while (std::getline(ss, cell, ',')) nonzero += std::stod(cell) != 0.0;
    }
    CHECK(nonzero == 1);
    std::ifstream g(pgm, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    g >> magic >> w >> h >> maxv;
    g.get();
    std::vector<unsigned char> px(static_cast<std::size_t>(w * h));
    g.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    CHECK(magic == "P5");
    CHECK(w == 64);
    CHECK(h == 32);
    CHECK(*std::max_element(px.begin(), px.end()) == 255);
    CHECK(px[4 * 64 + 9] == 255);
  }
  CHECK_THROWS(export_error_map(p, t, "/nonexistent-dir/x.csv", pgm));
  std::filesystem::remove(csv);
  std::filesystem::remove(pgm);
}

}  // TEST_SUITE
