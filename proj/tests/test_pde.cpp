#include <doctest.h>

#include <cmath>
#include <numbers>

#include "molab/pde.hpp"

using namespace molab;

namespace {

constexpr double pi = std::numbers::pi;

InitialCondition sine_mode(double amplitude = 1.0, int n = 1) {
  return InitialCondition::from_modes({SineMode{amplitude, n, 0.0}, SineMode{}, SineMode{}, SineMode{}});
}

AlphaEncoding alpha_of(PdeFamily f, std::initializer_list<double> v) {
  AlphaEncoding a{f, VectorXd(v.size())};
  int i = 0;
  for (double x : v) a.values(i++) = x;
  return a;
}

AlphaEncoding constant_wave_speed(double c) {
  return {PdeFamily::ParametricWave, VectorXd::Constant(grid::kTimeBoundarySensors, c)};
}

double standing_wave_error(int nx_fine) {
  SolverOptions opt;
  opt.nx_fine = nx_fine;
  const SolutionField s = solve(constant_wave_speed(1.0), sine_mode(), opt);
  double err = 0;
  for (int j = 0; j < grid::kEvalNt; ++j)
    for (int i = 0; i < grid::kEvalNx; ++i)
      err = std::max(err, std::abs(s.values(j, i) - std::cos(pi * grid::eval_t(j)) * std::sin(pi * grid::eval_x(i))));
  return err;
}

}  // namespace

TEST_SUITE("pde-solvers") {

TEST_CASE("family names and alpha lengths") {
  CHECK(alpha_length(PdeFamily::ConservationLaw) == 4);
  CHECK(alpha_length(PdeFamily::DiffusionReactionAdvection) == 5);
  CHECK(alpha_length(PdeFamily::KleinGordon) == 3);
  CHECK(alpha_length(PdeFamily::ParametricDiffusionReaction) == 129);
  CHECK(alpha_length(PdeFamily::ParametricWave) == 64);
  for (auto f : {PdeFamily::ConservationLaw, PdeFamily::DiffusionReactionAdvection, PdeFamily::KleinGordon,
                 PdeFamily::ParametricDiffusionReaction, PdeFamily::ParametricWave})
    CHECK(parse_family(to_string(f)) == f);
  CHECK_THROWS_AS(parse_family("burgers"), DomainError);
  CHECK_THROWS_AS(alpha_of(PdeFamily::KleinGordon, {1, 1}).validate(), DimensionError);
  CHECK_THROWS_AS(alpha_of(PdeFamily::ConservationLaw, {1, 1, 1, 0}).validate(), DomainError);
}

TEST_CASE("single sine mode initial condition") {
  const auto ic = sine_mode();
  const VectorXd s = ic.sensors();
  REQUIRE(s.size() == 64);
  for (int i = 0; i < 64; ++i) CHECK(s(i) == std::sin(pi * grid::u_sensor(i)));
  CHECK(ic(0.5) == doctest::Approx(1.0));
}

TEST_CASE("sampled initial conditions respect their flags") {
  int abs_count = 0, flip_count = 0, window_count = 0;
  const int n = 10000;
  VectorXd fine(512);
  for (int m = 0; m < 512; ++m) fine(m) = 2.0 * m / 512;
  for (int seed = 0; seed < n; ++seed) {
    const auto ic = sample_initial_condition(seed);
    abs_count += ic.abs_applied;
    flip_count += ic.sign_flipped;
    window_count += ic.window.has_value();
    if (ic.abs_applied && !ic.sign_flipped && seed < 2000) CHECK(ic.sample(fine).minCoeff() >= 0.0);
    if (seed < 200) {
      for (const auto& mode : ic.modes) {
        CHECK(mode.n >= 1);
        CHECK(mode.n <= 4);
        CHECK(mode.amplitude >= 0.0);
        CHECK(mode.amplitude <= 1.0);
      }
    }
  }
  CHECK(std::abs(abs_count / double(n) - 0.1) < 0.02);
  CHECK(std::abs(flip_count / double(n) - 0.5) < 0.02);
  CHECK(std::abs(window_count / double(n) - 0.1) < 0.02);
  CHECK(sample_initial_condition(42).sensors() == sample_initial_condition(42).sensors());
}

TEST_CASE("parameter ranges") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto claw = sample_parameters(PdeFamily::ConservationLaw, SampleMode::In, seed);
    CHECK(claw.values(3) >= 0.09);
    CHECK(claw.values(3) <= 0.11);
    for (int i = 0; i < 3; ++i) {
      CHECK(claw.values(i) >= 0.9);
      CHECK(claw.values(i) <= 1.1);
    }
    const auto ood = sample_parameters(PdeFamily::ConservationLaw, SampleMode::Ood, seed);
    CHECK(ood.values(0) >= 0.8);
    CHECK(ood.values(0) <= 1.2);

    const auto kg = sample_parameters(PdeFamily::KleinGordon, SampleMode::Ood, seed);
    for (int i = 0; i < 3; ++i) {
      CHECK(kg.values(i) >= 0.85);
      CHECK(kg.values(i) <= 1.15);
    }
    const auto dra = sample_parameters(PdeFamily::DiffusionReactionAdvection, SampleMode::In, seed);
    CHECK(dra.values(0) >= 0.009);
    CHECK(dra.values(0) <= 0.011);
    CHECK(dra.values(3) >= 1.0);
    CHECK(dra.values(3) <= 3.0);
    CHECK(dra.values(4) >= 1.0);
    CHECK(dra.values(4) <= 3.0);

    const auto pdr = sample_parameters(PdeFamily::ParametricDiffusionReaction, SampleMode::In, seed);
    CHECK(pdr.values.size() == 129);
    CHECK(pdr.values.minCoeff() > 0.0);
    CHECK(sample_parameters(PdeFamily::ParametricWave, SampleMode::In, seed).values.size() == 64);
  }
  CHECK_THROWS_AS(sample_parameters(PdeFamily::ParametricWave, SampleMode::Ood, 1), DomainError);
}

TEST_CASE("gaussian process draws") {
  const VectorXd flat = sample_gaussian_process(64, 1e-18, 0.5, 1.0, 3);
  CHECK((flat.array() - 1.0).abs().maxCoeff() < 1e-6);
  CHECK(sample_gaussian_process(64, 1.0, 0.5, 1.0, 9) == sample_gaussian_process(64, 1.0, 0.5, 1.0, 9));
  CHECK_FALSE(sample_gaussian_process(64, 1.0, 0.5, 1.0, 9) == sample_gaussian_process(64, 1.0, 0.5, 1.0, 10));

  VectorXd pts(64);
  for (int i = 0; i < 64; ++i) pts(i) = 2.0 * i / 63;
  GaussianProcess gp(pts, 2.0, 0.5, 0.0);
  const int draws = 20000;
  double s = 0, s2 = 0, cross = 0;
  for (int d = 0; d < draws; ++d) {
    const VectorXd v = gp.sample(d);
    s += v(10);
    s2 += v(10) * v(10);
    cross += v(10) * v(11);
  }
  const double mean = s / draws;
  const double var = s2 / draws - mean * mean;
  CHECK(std::abs(var - 2.0) / 2.0 < 0.05);
  const double dx = pts(11) - pts(10);
  CHECK(std::abs(cross / draws - 2.0 * std::exp(-dx * dx / (2 * 0.25))) < 0.1);
  CHECK_THROWS_AS(sample_gaussian_process(64, -1.0, 0.5, 0.0, 1), DomainError);
}

TEST_CASE("piecewise-linear sensor interpolation") {
  VectorXd s(3);
  s << 0.0, 2.0, 4.0;
  CHECK(interp_uniform(s, 2.0, 0.5) == doctest::Approx(1.0));
  CHECK(interp_uniform(s, 2.0, 2.0) == 4.0);
  CHECK(interp_uniform(s, 2.0, 0.0) == 0.0);
}

TEST_CASE("standing wave") {
  CHECK(standing_wave_error(512) < 1e-3);
}

TEST_CASE("wave refinement converges at second order") {
  const double coarse = standing_wave_error(128);
  const double fine = standing_wave_error(256);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("heat mode of the advection-diffusion-reaction family") {
  const double a1 = 0.2;
  const SolutionField s = solve(alpha_of(PdeFamily::DiffusionReactionAdvection, {a1, 0, 0, 2, 2}), sine_mode());
  double err = 0;
  for (int j = 0; j < grid::kEvalNt; ++j)
    for (int i = 0; i < grid::kEvalNx; ++i)
      err = std::max(err, std::abs(s.values(j, i) -
                                   std::exp(-a1 * pi * pi * grid::eval_t(j)) * std::sin(pi * grid::eval_x(i))));
  CHECK(err < 1e-3);
}

TEST_CASE("conservation-law steps conserve mass") {
  const double dx = 2.0 / 512;
  VectorXd u0(512);
  const auto ic = sample_initial_condition(17);
  for (int m = 0; m < 512; ++m) u0(m) = ic(m * dx);
  for (const VectorXd& alpha : {VectorXd((VectorXd(4) << 0, 0, 0, 0.1).finished()),
                                VectorXd((VectorXd(4) << 1, 1, 1, 0.1).finished())}) {
    ConservationLawStepper st(alpha, u0, dx);
    double prev = st.mass();
    for (int k = 0; k < 200; ++k) {
      st.step(st.stable_dt());
      CHECK(std::abs(st.mass() - prev) <= 1e-12);
      prev = st.mass();
    }
  }
}

TEST_CASE("restriction samples the nearest fine value") {
  FineField f;
  f.times = VectorXd::LinSpaced(32, 1.0 / 32, 2.0 - 1.0 / 32);
  f.positions = VectorXd(512);
  for (int m = 0; m < 512; ++m) f.positions(m) = 2.0 * m / 512;
  f.values = MatrixXd::Constant(32, 512, 0.75);
  CHECK((restrict_to_eval_grid(f).values.array() == 0.75).all());
  for (int j = 0; j < 32; ++j) f.values.row(j) = 3.0 * f.positions.transpose();
  const auto r = restrict_to_eval_grid(f);
  for (int i = 0; i < 64; ++i) CHECK(r.values(5, i) == doctest::Approx(3.0 * grid::eval_x(i)).epsilon(1e-15));
  f.values = MatrixXd::Zero(32, 500);
  f.positions = VectorXd::Zero(500);
  CHECK_THROWS_AS(restrict_to_eval_grid(f), DomainError);
}

TEST_CASE("restriction is stable under refinement") {
  const auto ic = sample_initial_condition(3);
  for (auto family : {PdeFamily::KleinGordon, PdeFamily::ParametricWave, PdeFamily::DiffusionReactionAdvection}) {
    CAPTURE(to_string(family));
    const auto alpha = sample_parameters(family, SampleMode::In, 5);
    SolverOptions hi;
    hi.nx_fine = 1024;
    const double diff = (solve(alpha, ic).values - solve(alpha, ic, hi).values).cwiseAbs().maxCoeff();
    CHECK(diff < 2e-2);
  }
}

TEST_CASE("every family produces a finite field") {
  const auto ic = sample_initial_condition(8);
  for (auto family : {PdeFamily::ConservationLaw, PdeFamily::DiffusionReactionAdvection, PdeFamily::KleinGordon,
                      PdeFamily::ParametricDiffusionReaction, PdeFamily::ParametricWave}) {
    CAPTURE(to_string(family));
    SolverOptions opt;
    opt.nx_fine = 128;
    const auto s = solve(sample_parameters(family, SampleMode::In, 2), ic, opt);
    CHECK(s.values.allFinite());
    CHECK(s.values.cwiseAbs().maxCoeff() < 10.0);
  }
}

TEST_CASE("blow-up and invalid inputs raise") {
  SolverOptions opt;
  opt.nx_fine = 128;
  CHECK_THROWS_AS(solve(alpha_of(PdeFamily::KleinGordon, {1, 0.1, -400}), sine_mode(3.0), opt), SolverError);
  AlphaEncoding bad{PdeFamily::ParametricDiffusionReaction, VectorXd::Constant(129, 0.1)};
  bad.values(40) = -0.2;
  CHECK_THROWS_AS(solve(bad, sine_mode(), opt), DomainError);
  opt.nx_fine = 100;
  CHECK_THROWS_AS(solve(constant_wave_speed(1.0), sine_mode(), opt), DomainError);
}

}  // TEST_SUITE
