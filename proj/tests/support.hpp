#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "molab/architectures.hpp"
#include "molab/training.hpp"

namespace molab::testing {

inline ArchitectureSpec tiny_spec(ArchitectureKind kind, std::mt19937_64& rng, bool per_p = false) {
  std::uniform_int_distribution<int> small(1, 3), depth(1, 3), width(2, 5);
  ArchitectureSpec s;
  s.kind = kind;
  s.trunk_count = small(rng);
  s.branch_count = s.trunk_count;
  s.u_sensors = small(rng) + 1;
  s.alpha_dim = kind == ArchitectureKind::DeepONet ? 0 : small(rng);
  if (kind == ArchitectureKind::MONet) {
    s.branch_count = small(rng);
    s.param_net_count = 1;
  }
  if (kind == ArchitectureKind::MNO) {
    s.param_net_count = small(rng);
    s.per_p_trunks = per_p;
  }
  s.trunk = {depth(rng), width(rng)};
  s.branch = {depth(rng), width(rng)};
  s.param = {depth(rng), width(rng)};
  return s;
}

/// Flattened view of every trainable scalar in the model.
inline std::vector<double*> parameter_pointers(ModelState& m) {
  std::vector<double*> out;
  for (const auto& b : parameter_blocks(m))
    for (Eigen::Index i = 0; i < b.size; ++i) out.push_back(b.data + i);
  return out;
}

inline std::vector<double> gradient_values(ModelGradients& g) {
  std::vector<double> out;
  for (const auto& b : parameter_blocks(g))
    for (Eigen::Index i = 0; i < b.size; ++i) out.push_back(b.data[i]);
  return out;
}

struct FdCheck {
  double relative_error = 0.0;  // ||analytic - fd|| / max(||analytic||, ||fd||) over smooth coordinates
  int checked = 0;
  int kinks = 0;
};

/// Compares architecture_backward against central differences with step h.
/// The output is piecewise linear in any single parameter, so one-sided slopes
/// agree to rounding away from a ReLU kink; coordinates where they disagree are skipped.
inline FdCheck finite_difference_check(ModelState model, const VectorXd& alpha, const VectorXd& u,
                                       const VectorXd& x, double h = 1e-5) {
  ModelGradients g = architecture_backward(model, alpha, u, x, 1.0);
  const std::vector<double> analytic = gradient_values(g);
  std::vector<double*> params = parameter_pointers(model);
  FdCheck r;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  const double f0 = evaluate_point(model, alpha, u, x);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + h;
    const double fp = evaluate_point(model, alpha, u, x);
    *params[i] = saved - h;
    const double fm = evaluate_point(model, alpha, u, x);
    *params[i] = saved;
    const double right = (fp - f0) / h, left = (f0 - fm) / h;
    const double scale = std::max({std::abs(right), std::abs(left), 1.0});
    if (std::abs(right - left) > 1e-6 * scale) {
      ++r.kinks;
      continue;
    }
    const double fd = (fp - fm) / (2 * h);
    diff2 += (analytic[i] - fd) * (analytic[i] - fd);
    a2 += analytic[i] * analytic[i];
    n2 += fd * fd;
    ++r.checked;
  }
  const double denom = std::sqrt(std::max(a2, n2));
  r.relative_error = denom > 0 ? std::sqrt(diff2) / denom : std::sqrt(diff2);
  return r;
}

/// Random tiny instance of the given kind followed by a finite-difference check.
inline FdCheck random_gradient_instance(ArchitectureKind kind, std::uint64_t seed, bool per_p = false) {
  std::mt19937_64 rng(seed);
  const ArchitectureSpec s = tiny_spec(kind, rng, per_p);
  const ModelState m = init_model(s, seed);
  std::normal_distribution<double> n(0.0, 1.0);
  VectorXd alpha(s.alpha_dim), u(s.u_sensors), x(2);
  for (auto& v : alpha) v = n(rng);
  for (auto& v : u) v = n(rng);
  for (auto& v : x) v = 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
  return finite_difference_check(m, alpha, u, x);
}

}  // namespace molab::testing
