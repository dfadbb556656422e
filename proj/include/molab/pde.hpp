#pragma once

// Parametric 1D PDE families on (t, x) in [0,2] x [0,2] with periodic x,
// their input samplers, and reference solvers.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "molab/core/mlp.hpp"

namespace molab {

enum class PdeFamily : std::uint8_t {
  ConservationLaw = 0,
  DiffusionReactionAdvection = 1,
  KleinGordon = 2,
  ParametricDiffusionReaction = 3,
  ParametricWave = 4,
};

/// CLI names: conservation-law, dra, klein-gordon, parametric-dr, parametric-wave.
std::string_view to_string(PdeFamily f);
PdeFamily parse_family(std::string_view name);
int alpha_length(PdeFamily f);
bool is_function_family(PdeFamily f);

enum class SampleMode : std::uint8_t { In = 0, Ood = 1 };
std::string_view to_string(SampleMode m);
SampleMode parse_mode(std::string_view name);

struct AlphaEncoding {
  PdeFamily family = PdeFamily::ConservationLaw;
  VectorXd values;

  void validate() const;
  bool operator==(const AlphaEncoding&) const = default;
};

// Evaluation and sensor grids.
namespace grid {
inline constexpr double kLength = 2.0;
inline constexpr int kEvalNt = 32;
inline constexpr int kEvalNx = 64;
inline constexpr int kUSensors = 64;
inline constexpr int kSpaceBoundarySensors = 129;
inline constexpr int kTimeBoundarySensors = 64;

inline double eval_t(int j) { return (j + 0.5) * kLength / kEvalNt; }
inline double eval_x(int i) { return (i + 0.5) * kLength / kEvalNx; }
inline double u_sensor(int i) { return (i + 0.5) * kLength / kUSensors; }
inline double space_boundary(int i) { return i * kLength / (kSpaceBoundarySensors - 1); }
inline double time_boundary(int i) { return i * kLength / (kTimeBoundarySensors - 1); }

/// All 2048 (t, x) evaluation points, time-major (column j*64 + i).
MatrixXd eval_points();
}  // namespace grid

struct SineMode {
  double amplitude = 0.0;
  int n = 1;           // wavenumber k = pi * n
  double phase = 0.0;
};

/// Smooth indicator 0.5 * (tanh((x-a)/w) - tanh((x-b)/w)).
struct SmoothWindow {
  double a = 0.0;
  double b = 2.0;
  double width = 0.05;

  double operator()(double x) const;
};

struct InitialCondition {
  std::array<SineMode, 4> modes{};
  bool abs_applied = false;
  bool sign_flipped = false;
  std::optional<SmoothWindow> window;

  double operator()(double x) const;
  VectorXd sample(const VectorXd& xs) const;
  /// Values at the 64 cell-center sensors.
  VectorXd sensors() const;

  static InitialCondition from_modes(std::array<SineMode, 4> modes);
};

InitialCondition sample_initial_condition(std::uint64_t seed);

/// Vector families draw each entry uniformly in a range around the reference
/// value; function families draw a Gaussian process at their sensors.
AlphaEncoding sample_parameters(PdeFamily family, SampleMode mode, std::uint64_t seed);

/// Squared-exponential Gaussian process with cached Cholesky factor.
class GaussianProcess {
 public:
  GaussianProcess(const VectorXd& points, double variance, double length_scale, double mean);
  VectorXd sample(std::uint64_t seed) const;
  double jitter() const { return jitter_; }

 private:
  MatrixXd factor_;
  double mean_;
  double jitter_ = 0.0;
};

/// One draw at n_points uniform points 2i/(n-1) on [0, 2].
VectorXd sample_gaussian_process(int n_points, double variance, double length_scale, double mean,
                                 std::uint64_t seed);

struct SolverOptions {
  int nx_fine = 512;     // periodic nodes x_m = 2m/nx_fine
  int nt_snapshots = 32; // snapshot times (j + 0.5) * 2 / nt_snapshots
  double blowup_threshold = 1e6;
};

struct FineField {
  VectorXd times;     // nt
  VectorXd positions; // nx
  MatrixXd values;    // nt x nx
};

/// Field on the 32 x 64 evaluation grid; row j is time eval_t(j), column i is x eval_x(i).
struct SolutionField {
  MatrixXd values = MatrixXd::Zero(grid::kEvalNt, grid::kEvalNx);

  /// Time-major flattening, matching grid::eval_points().
  VectorXd flat() const;
  static SolutionField from_flat(const VectorXd& v);
  bool operator==(const SolutionField& o) const { return values == o.values; }
};

FineField solve_fine(const AlphaEncoding& alpha, const InitialCondition& u0, const SolverOptions& opt = {});
SolutionField solve(const AlphaEncoding& alpha, const InitialCondition& u0, const SolverOptions& opt = {});

/// Nearest-sample restriction; fine resolutions must be multiples of 32 (t) and 64 (x).
SolutionField restrict_to_eval_grid(const FineField& fine);

/// Explicit finite-volume stepper for u_t + (a1 u + a2 u^2 + a3 u^3)_x = a4 u_xx.
class ConservationLawStepper {
 public:
  ConservationLawStepper(const VectorXd& alpha, VectorXd u0, double dx);

  double stable_dt() const;
  void step(double dt);
  const VectorXd& state() const { return u_; }
  double mass() const { return u_.sum() * dx_; }

 private:
  VectorXd rhs(const VectorXd& u) const;

  double a1_, a2_, a3_, nu_, dx_;
  VectorXd u_;
};

/// Piecewise-linear interpolation of samples taken at uniform points on [0, L]
/// (first and last sample at the endpoints).
double interp_uniform(const VectorXd& samples, double length, double s);

}  // namespace molab
