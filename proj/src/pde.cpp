#include "molab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace molab {

std::string_view to_string(PdeFamily f) {
  switch (f) {
    case PdeFamily::ConservationLaw: return "conservation-law";
    case PdeFamily::DiffusionReactionAdvection: return "dra";
    case PdeFamily::KleinGordon: return "klein-gordon";
    case PdeFamily::ParametricDiffusionReaction: return "parametric-dr";
    case PdeFamily::ParametricWave: return "parametric-wave";
  }
  return "?";
}

PdeFamily parse_family(std::string_view name) {
  for (int k = 0; k <= 4; ++k) {
    const auto f = static_cast<PdeFamily>(k);
    if (to_string(f) == name) return f;
  }
  throw DomainError("unknown PDE family '" + std::string(name) +
                    "' (expected conservation-law, dra, klein-gordon, parametric-dr, parametric-wave)");
}

int alpha_length(PdeFamily f) {
  switch (f) {
    case PdeFamily::ConservationLaw: return 4;
    case PdeFamily::DiffusionReactionAdvection: return 5;
    case PdeFamily::KleinGordon: return 3;
    case PdeFamily::ParametricDiffusionReaction: return grid::kSpaceBoundarySensors;
    case PdeFamily::ParametricWave: return grid::kTimeBoundarySensors;
  }
  return 0;
}

bool is_function_family(PdeFamily f) {
  return f == PdeFamily::ParametricDiffusionReaction || f == PdeFamily::ParametricWave;
}

std::string_view to_string(SampleMode m) { return m == SampleMode::In ? "in" : "ood"; }

SampleMode parse_mode(std::string_view name) {
  if (name == "in") return SampleMode::In;
  if (name == "ood") return SampleMode::Ood;
  throw DomainError("unknown sampling mode '" + std::string(name) + "' (expected in or ood)");
}

void AlphaEncoding::validate() const {
  if (values.size() != alpha_length(family))
    throw DimensionError(std::string(to_string(family)) + " expects " + std::to_string(alpha_length(family)) +
                         " parameter values, got " + std::to_string(values.size()));
  if (!values.allFinite()) throw DomainError("parameter values must be finite");
  if (family == PdeFamily::ConservationLaw && !(values(3) > 0))
    throw DomainError("conservation-law viscosity alpha4 must be positive");
  if (family == PdeFamily::ParametricDiffusionReaction && !(values.minCoeff() > 0))
    throw DomainError("diffusivity samples must be positive");
}

namespace grid {
MatrixXd eval_points() {
  MatrixXd p(2, kEvalNt * kEvalNx);
  for (int j = 0; j < kEvalNt; ++j)
    for (int i = 0; i < kEvalNx; ++i) {
      p(0, j * kEvalNx + i) = eval_t(j);
      p(1, j * kEvalNx + i) = eval_x(i);
    }
  return p;
}
}  // namespace grid

VectorXd SolutionField::flat() const {
  VectorXd v(values.size());
  for (Eigen::Index j = 0; j < values.rows(); ++j) v.segment(j * values.cols(), values.cols()) = values.row(j);
  return v;
}

SolutionField SolutionField::from_flat(const VectorXd& v) {
  if (v.size() != grid::kEvalNt * grid::kEvalNx) throw DimensionError("flat field must have 2048 entries");
  SolutionField f;
  for (int j = 0; j < grid::kEvalNt; ++j) f.values.row(j) = v.segment(j * grid::kEvalNx, grid::kEvalNx);
  return f;
}

double interp_uniform(const VectorXd& samples, double length, double s) {
  const Eigen::Index n = samples.size();
  if (n == 1) return samples(0);
  const double pos = std::clamp(s / length * static_cast<double>(n - 1), 0.0, static_cast<double>(n - 1));
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), n - 2);
  const double frac = pos - static_cast<double>(i);
  return (1.0 - frac) * samples(i) + frac * samples(i + 1);
}

// ---------------------------------------------------------------------------
// Initial conditions

double SmoothWindow::operator()(double x) const {
  return 0.5 * (std::tanh((x - a) / width) - std::tanh((x - b) / width));
}

double InitialCondition::operator()(double x) const {
  double u = 0.0;
  for (const auto& m : modes) u += m.amplitude * std::sin(std::numbers::pi * m.n * x + m.phase);
  if (abs_applied) u = std::abs(u);
  if (sign_flipped) u = -u;
  if (window) u *= (*window)(x);
  return u;
}

VectorXd InitialCondition::sample(const VectorXd& xs) const {
  VectorXd out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) out(i) = (*this)(xs(i));
  return out;
}

VectorXd InitialCondition::sensors() const {
  VectorXd out(grid::kUSensors);
  for (int i = 0; i < grid::kUSensors; ++i) out(i) = (*this)(grid::u_sensor(i));
  return out;
}

InitialCondition InitialCondition::from_modes(std::array<SineMode, 4> modes) {
  InitialCondition ic;
  ic.modes = modes;
  return ic;
}

InitialCondition sample_initial_condition(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> wave(1, 4);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  InitialCondition ic;
  for (auto& m : ic.modes) {
    m.amplitude = unit(rng);
    m.n = wave(rng);
    m.phase = phase(rng);
  }
  ic.abs_applied = unit(rng) < 0.1;
  ic.sign_flipped = unit(rng) < 0.5;
  if (unit(rng) < 0.1) {
    SmoothWindow w;
    const double len = 0.3 + 0.9 * unit(rng);
    w.a = 0.1 + (1.8 - len) * unit(rng);
    w.b = w.a + len;
    ic.window = w;
  }
  return ic;
}

// ---------------------------------------------------------------------------
// Parameters

GaussianProcess::GaussianProcess(const VectorXd& points, double variance, double length_scale, double mean)
    : mean_(mean) {
  const Eigen::Index n = points.size();
  if (n < 2) throw DomainError("Gaussian process needs at least 2 points");
  if (!(variance > 0)) throw DomainError("Gaussian process variance must be positive");
  if (!(length_scale > 0)) throw DomainError("Gaussian process length scale must be positive");
  MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = points(i) - points(j);
      k(i, j) = variance * std::exp(-d * d / (2.0 * length_scale * length_scale));
    }
  for (double rel = 1e-12; rel <= 1e-2 * (1 + 1e-9); rel *= 10.0) {
    jitter_ = rel * variance;
    Eigen::LLT<MatrixXd> llt(k + jitter_ * MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      return;
    }
  }
  throw Error("Cholesky factorization failed even with jitter 1e-2 * variance");
}

VectorXd GaussianProcess::sample(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd z(factor_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return (factor_ * z).array() + mean_;
}

VectorXd sample_gaussian_process(int n_points, double variance, double length_scale, double mean,
                                 std::uint64_t seed) {
  if (n_points < 2) throw DomainError("Gaussian process needs at least 2 points");
  const VectorXd pts = VectorXd::LinSpaced(n_points, 0.0, grid::kLength);
  return GaussianProcess(pts, variance, length_scale, mean).sample(seed);
}

namespace {

constexpr double kDiffusivityMean = 0.1;
constexpr double kDiffusivityVariance = 1e-4;
constexpr double kDiffusivityLengthScale = 0.4;
constexpr double kDiffusivityFloor = 1e-4;
constexpr double kWaveSpeedMean = 1.0;
constexpr double kWaveSpeedVariance = 1.0;
constexpr double kWaveSpeedLengthScale = 0.5;

const GaussianProcess& diffusivity_process() {
  static const GaussianProcess gp(VectorXd::LinSpaced(grid::kSpaceBoundarySensors, 0.0, grid::kLength),
                                  kDiffusivityVariance, kDiffusivityLengthScale, kDiffusivityMean);
  return gp;
}

const GaussianProcess& wave_speed_process() {
  static const GaussianProcess gp(VectorXd::LinSpaced(grid::kTimeBoundarySensors, 0.0, grid::kLength),
                                  kWaveSpeedVariance, kWaveSpeedLengthScale, kWaveSpeedMean);
  return gp;
}

}  // namespace

AlphaEncoding sample_parameters(PdeFamily family, SampleMode mode, std::uint64_t seed) {
  AlphaEncoding a;
  a.family = family;
  if (is_function_family(family)) {
    if (mode == SampleMode::Ood)
      throw DomainError(std::string(to_string(family)) + " has no out-of-distribution parameter range");
    if (family == PdeFamily::ParametricDiffusionReaction)
      a.values = diffusivity_process().sample(seed).cwiseMax(kDiffusivityFloor);
    else
      a.values = wave_speed_process().sample(seed);
    return a;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto around = [&](double center, double spread) { return center * (1.0 - spread + 2.0 * spread * unit(rng)); };
  const bool in = mode == SampleMode::In;
  switch (family) {
    case PdeFamily::ConservationLaw: {
      const double s = in ? 0.10 : 0.20;
      a.values.resize(4);
      const double c[4] = {1.0, 1.0, 1.0, 0.1};
      for (int i = 0; i < 4; ++i) a.values(i) = around(c[i], s);
      break;
    }
    case PdeFamily::DiffusionReactionAdvection: {
      const double s = in ? 0.10 : 0.20;
      a.values.resize(5);
      const double c[3] = {0.01, 1.0, 1.0};
      for (int i = 0; i < 3; ++i) a.values(i) = around(c[i], s);
      a.values(3) = 1.0 + 2.0 * unit(rng);
      a.values(4) = 1.0 + 2.0 * unit(rng);
      break;
    }
    case PdeFamily::KleinGordon: {
      const double s = in ? 0.10 : 0.15;
      a.values.resize(3);
      for (int i = 0; i < 3; ++i) a.values(i) = around(1.0, s);
      break;
    }
    default: break;
  }
  return a;
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

// v_m = u_{m+1} and u_{m-1} with periodic wrap.
VectorXd next(const VectorXd& u) {
  const Eigen::Index n = u.size();
  VectorXd v(n);
  v.head(n - 1) = u.tail(n - 1);
  v(n - 1) = u(0);
  return v;
}

VectorXd prev(const VectorXd& u) {
  const Eigen::Index n = u.size();
  VectorXd v(n);
  v.tail(n - 1) = u.head(n - 1);
  v(0) = u(n - 1);
  return v;
}

VectorXd laplacian(const VectorXd& u, double dx) { return (next(u) - 2.0 * u + prev(u)) / (dx * dx); }

class Integrator {
 public:
  virtual ~Integrator() = default;
  virtual double stable_dt(double t) const = 0;
  virtual void step(double t, double dt) = 0;
  virtual const VectorXd& state() const = 0;
};

FineField march(Integrator& integ, PdeFamily family, const VectorXd& positions, const SolverOptions& opt) {
  FineField out;
  out.positions = positions;
  out.times.resize(opt.nt_snapshots);
  out.values.resize(opt.nt_snapshots, positions.size());
  double t = 0.0;
  for (int j = 0; j < opt.nt_snapshots; ++j) {
    const double target = (j + 0.5) * grid::kLength / opt.nt_snapshots;
    while (t < target) {
      double dt = integ.stable_dt(t);
      if (!(dt > 0) || !std::isfinite(dt)) {
        std::ostringstream msg;
        msg << to_string(family) << " solver: invalid time step at t=" << t;
        throw SolverError(msg.str());
      }
      const bool last = dt >= (target - t) * (1.0 - 1e-12);
      if (last) dt = target - t;
      integ.step(t, dt);
      t = last ? target : t + dt;
      const double peak = integ.state().cwiseAbs().maxCoeff();
      if (!(peak <= opt.blowup_threshold)) {
        std::ostringstream msg;
        msg << to_string(family) << " solver blew up at t=" << t << " (max |u| = " << peak << ")";
        throw SolverError(msg.str());
      }
    }
    out.times(j) = target;
    out.values.row(j) = integ.state().transpose();
  }
  return out;
}

class ClawIntegrator final : public Integrator {
 public:
  ClawIntegrator(const VectorXd& alpha, VectorXd u0, double dx) : s_(alpha, std::move(u0), dx) {}
  double stable_dt(double) const override { return s_.stable_dt(); }
  void step(double, double dt) override { s_.step(dt); }
  const VectorXd& state() const override { return s_.state(); }

 private:
  ConservationLawStepper s_;
};

// Second-order central differences in space with Heun's method in time.
class ReactionDiffusionIntegrator : public Integrator {
 public:
  ReactionDiffusionIntegrator(VectorXd u0, double dx) : u_(std::move(u0)), dx_(dx) {}
  void step(double, double dt) override {
    const VectorXd k1 = rhs(u_);
    const VectorXd u1 = u_ + dt * k1;
    u_ = 0.5 * (u_ + u1 + dt * rhs(u1));
  }
  const VectorXd& state() const override { return u_; }

 protected:
  virtual VectorXd rhs(const VectorXd& u) const = 0;
  VectorXd u_;
  double dx_;
};

class DraIntegrator final : public ReactionDiffusionIntegrator {
 public:
  DraIntegrator(const VectorXd& a, VectorXd u0, double dx) : ReactionDiffusionIntegrator(std::move(u0), dx) {
    for (int i = 0; i < 5; ++i) a_[i] = a(i);
  }

  double stable_dt(double) const override {
    double dt = std::numeric_limits<double>::infinity();
    if (a_[0] != 0) dt = std::min(dt, 0.4 * dx_ * dx_ / std::abs(a_[0]));
    if (a_[1] != 0) dt = std::min(dt, 0.5 * dx_ / std::abs(a_[1]));
    if (a_[2] != 0) {
      double rate = 0.0;
      for (Eigen::Index m = 0; m < u_.size(); ++m) {
        const double au = std::abs(u_(m));
        const double d = a_[3] * std::pow(au, a_[3] - 1) - (a_[3] + a_[4]) * std::pow(au, a_[3] + a_[4] - 1);
        rate = std::max(rate, std::abs(a_[2] * d));
      }
      if (rate > 0) dt = std::min(dt, 0.5 / rate);
    }
    if (!std::isfinite(dt)) dt = 0.01;
    return dt;
  }

 private:
  VectorXd rhs(const VectorXd& u) const override {
    VectorXd r = a_[0] * laplacian(u, dx_) + a_[1] * (next(u) - prev(u)) / (2.0 * dx_);
    if (a_[2] != 0) {
      for (Eigen::Index m = 0; m < u.size(); ++m) {
        const double au = std::abs(u(m));
        const double s = u(m) < 0 ? -1.0 : 1.0;
        r(m) += a_[2] * s * std::pow(au, a_[3]) * (1.0 - std::pow(au, a_[4]));
      }
    }
    return r;
  }

  double a_[5];
};

class ParametricDrIntegrator final : public ReactionDiffusionIntegrator {
 public:
  ParametricDrIntegrator(const VectorXd& sensors, VectorXd u0, double dx)
      : ReactionDiffusionIntegrator(std::move(u0), dx), half_(u_.size()) {
    for (Eigen::Index m = 0; m < half_.size(); ++m)
      half_(m) = std::max(interp_uniform(sensors, grid::kLength, (m + 0.5) * dx), kDiffusivityFloor);
    max_diff_ = half_.maxCoeff();
  }

  double stable_dt(double) const override {
    const double rate = (1.0 - 2.0 * u_.array().abs()).abs().maxCoeff();
    return std::min(0.4 * dx_ * dx_ / max_diff_, rate > 0 ? 0.5 / rate : 1.0);
  }

 private:
  VectorXd rhs(const VectorXd& u) const override {
    // half_(m) sits between nodes m and m+1.
    const VectorXd flux = half_.cwiseProduct(next(u) - u);
    return (flux - prev(flux)) / (dx_ * dx_) + (u.array() * (1.0 - u.array().abs())).matrix();
  }

  VectorXd half_;
  double max_diff_ = 0.0;
};

// Kick-drift-kick Stormer-Verlet for u_tt = accel(u, t), u_t(0) = 0.
class VerletIntegrator : public Integrator {
 public:
  VerletIntegrator(VectorXd u0, double dx) : u_(std::move(u0)), v_(VectorXd::Zero(u_.size())), dx_(dx) {}
  void step(double t, double dt) override {
    v_ += 0.5 * dt * accel(u_, t);
    u_ += dt * v_;
    v_ += 0.5 * dt * accel(u_, t + dt);
  }
  const VectorXd& state() const override { return u_; }

 protected:
  virtual VectorXd accel(const VectorXd& u, double t) const = 0;
  VectorXd u_, v_;
  double dx_;
};

class KleinGordonIntegrator final : public VerletIntegrator {
 public:
  KleinGordonIntegrator(const VectorXd& a, VectorXd u0, double dx)
      : VerletIntegrator(std::move(u0), dx), c2_(a(0) * a(0)), mass_(a(1) * a(1) * std::pow(a(0), 4)), cubic_(a(2)) {}

  double stable_dt(double) const override {
    double dt = c2_ > 0 ? 0.5 * dx_ / std::sqrt(c2_) : 0.01;
    const double umax = u_.cwiseAbs().maxCoeff();
    const double omega = std::sqrt(std::abs(mass_) + 3.0 * std::abs(cubic_) * umax * umax);
    if (omega > 0) dt = std::min(dt, 0.5 / omega);
    return dt;
  }

 private:
  VectorXd accel(const VectorXd& u, double) const override {
    return c2_ * laplacian(u, dx_) - mass_ * u - cubic_ * u.array().cube().matrix();
  }

  double c2_, mass_, cubic_;
};

class WaveIntegrator final : public VerletIntegrator {
 public:
  WaveIntegrator(const VectorXd& speed, VectorXd u0, double dx)
      : VerletIntegrator(std::move(u0), dx), speed_(speed), cmax_(speed.cwiseAbs().maxCoeff()) {}

  double stable_dt(double) const override { return cmax_ > 0 ? 0.5 * dx_ / cmax_ : 0.01; }

 private:
  VectorXd accel(const VectorXd& u, double t) const override {
    const double c = interp_uniform(speed_, grid::kLength, t);
    return (c * c) * laplacian(u, dx_);
  }

  VectorXd speed_;
  double cmax_;
};

}  // namespace

ConservationLawStepper::ConservationLawStepper(const VectorXd& alpha, VectorXd u0, double dx)
    : a1_(alpha(0)), a2_(alpha(1)), a3_(alpha(2)), nu_(alpha(3)), dx_(dx), u_(std::move(u0)) {
  if (alpha.size() != 4) throw DimensionError("conservation law expects 4 parameters");
  if (u_.size() < 3) throw DimensionError("conservation law needs at least 3 cells");
}

double ConservationLawStepper::stable_dt() const {
  const auto u = u_.array();
  const double wave = (a1_ + 2.0 * a2_ * u + 3.0 * a3_ * u.square()).abs().maxCoeff();
  const double rate = wave / dx_ + 2.0 * std::abs(nu_) / (dx_ * dx_);
  return rate > 0 ? 0.4 / rate : 0.01;
}

VectorXd ConservationLawStepper::rhs(const VectorXd& u) const {
  const Eigen::Index n = u.size();
  const VectorXd up = next(u);
  const VectorXd fwd = up - u;
  const VectorXd bwd = prev(fwd);
  // van Leer limited slopes
  VectorXd slope(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double p = fwd(m) * bwd(m);
    slope(m) = p > 0 ? 2.0 * p / (fwd(m) + bwd(m)) : 0.0;
  }
  const VectorXd ul = u + 0.5 * slope;
  const VectorXd ur = up - 0.5 * next(slope);
  auto f = [&](const VectorXd& v) {
    const auto a = v.array();
    return (a1_ * a + a2_ * a.square() + a3_ * a.cube()).matrix().eval();
  };
  auto df = [&](const VectorXd& v) {
    const auto a = v.array();
    return (a1_ + 2.0 * a2_ * a + 3.0 * a3_ * a.square()).abs().matrix().eval();
  };
  const VectorXd speed = df(ul).cwiseMax(df(ur));
  // flux(m) lives at the interface m+1/2
  const VectorXd flux = 0.5 * (f(ul) + f(ur)) - 0.5 * speed.cwiseProduct(ur - ul) - (nu_ / dx_) * fwd;
  return -(flux - prev(flux)) / dx_;
}

void ConservationLawStepper::step(double dt) {
  const VectorXd u1 = u_ + dt * rhs(u_);
  u_ = 0.5 * (u_ + u1 + dt * rhs(u1));
}

FineField solve_fine(const AlphaEncoding& alpha, const InitialCondition& u0, const SolverOptions& opt) {
  alpha.validate();
  if (opt.nx_fine < 8) throw DomainError("nx_fine must be at least 8");
  if (opt.nt_snapshots < 1) throw DomainError("nt_snapshots must be at least 1");
  const double dx = grid::kLength / opt.nx_fine;
  VectorXd xs(opt.nx_fine);
  for (int m = 0; m < opt.nx_fine; ++m) xs(m) = m * dx;
  VectorXd u = u0.sample(xs);

  switch (alpha.family) {
    case PdeFamily::ConservationLaw: {
      ClawIntegrator integ(alpha.values, std::move(u), dx);
      return march(integ, alpha.family, xs, opt);
    }
    case PdeFamily::DiffusionReactionAdvection: {
      DraIntegrator integ(alpha.values, std::move(u), dx);
      return march(integ, alpha.family, xs, opt);
    }
    case PdeFamily::KleinGordon: {
      KleinGordonIntegrator integ(alpha.values, std::move(u), dx);
      return march(integ, alpha.family, xs, opt);
    }
    case PdeFamily::ParametricDiffusionReaction: {
      ParametricDrIntegrator integ(alpha.values, std::move(u), dx);
      return march(integ, alpha.family, xs, opt);
    }
    case PdeFamily::ParametricWave: {
      WaveIntegrator integ(alpha.values, std::move(u), dx);
      return march(integ, alpha.family, xs, opt);
    }
  }
  throw DomainError("unknown PDE family");
}

SolutionField solve(const AlphaEncoding& alpha, const InitialCondition& u0, const SolverOptions& opt) {
  return restrict_to_eval_grid(solve_fine(alpha, u0, opt));
}

SolutionField restrict_to_eval_grid(const FineField& fine) {
  const Eigen::Index nt = fine.times.size(), nx = fine.positions.size();
  if (fine.values.rows() != nt || fine.values.cols() != nx) throw DimensionError("fine field shape mismatch");
  if (nt == 0 || nt % grid::kEvalNt != 0)
    throw DomainError("fine time resolution " + std::to_string(nt) + " is not a multiple of 32");
  if (nx == 0 || nx % grid::kEvalNx != 0)
    throw DomainError("fine space resolution " + std::to_string(nx) + " is not a multiple of 64");
  auto nearest = [](const VectorXd& axis, double v) {
    Eigen::Index best = 0;
    (axis.array() - v).abs().minCoeff(&best);
    return best;
  };
  SolutionField out;
  for (int j = 0; j < grid::kEvalNt; ++j) {
    const Eigen::Index jj = nearest(fine.times, grid::eval_t(j));
    for (int i = 0; i < grid::kEvalNx; ++i) out.values(j, i) = fine.values(jj, nearest(fine.positions, grid::eval_x(i)));
  }
  return out;
}

}  // namespace molab
