#pragma once

// Constructive approximation primitives (eta-nets, hat partitions of unity)
// and closed-form network-size calculators.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "molab/core/mlp.hpp"

namespace molab {

struct Box {
  VectorXd lower;
  VectorXd upper;

  static Box cube(int dim, double gamma);  // [-gamma, gamma]^dim
  static Box interval(double lo, double hi);
  int dim() const { return static_cast<int>(lower.size()); }
};

/// Uniform lattice of cell centers with spacing at most 2*eta/sqrt(d), so every
/// point of the box is strictly within eta of a center.
struct EtaNet {
  Box domain;
  double eta = 0.0;
  double spacing = 0.0;
  std::vector<int> counts;  // centers per dimension
  MatrixXd centers;         // d x n

  Eigen::Index size() const { return centers.cols(); }
};

EtaNet build_eta_net(const Box& domain, double eta);

/// Hat weights T*_j(x) = max(0, 1 - |x - x_j| / eta) normalized to sum 1.
struct PartitionOfUnity {
  EtaNet net;

  explicit PartitionOfUnity(EtaNet n) : net(std::move(n)) {}
  VectorXd raw_weights(const VectorXd& x) const;
};

/// Throws DomainError "cover violated at x = ..." when no hat covers x.
VectorXd pou_eval(const PartitionOfUnity& pou, const VectorXd& x);

/// sum_j v(x_j) T_j(x) from samples at the net centers.
double project_function(const VectorXd& center_values, const PartitionOfUnity& pou, const VectorXd& x);

/// sum_m z_m T_m(x).
double lift_discrete(const VectorXd& z, const PartitionOfUnity& pou, const VectorXd& x);

// ---------------------------------------------------------------------------
// Size calculators

/// A positive quantity that may exceed double range. log10 is +inf when even
/// the logarithm overflows; log10_log10 is then the only usable field.
struct Magnitude {
  double value = 1.0;  // +inf when not representable
  double log10 = 0.0;
  double log10_log10 = -std::numeric_limits<double>::infinity();

  static Magnitude from_value(double v);
  static Magnitude from_log10(double l);
  static Magnitude from_log10_log10(double ll);

  bool representable() const { return std::isfinite(value); }
  std::string str() const;
  bool operator==(const Magnitude&) const = default;
};
std::partial_ordering operator<=>(const Magnitude& a, const Magnitude& b);

/// base^exponent * factor, staying in log space when needed.
Magnitude power_term(const Magnitude& base, const Magnitude& exponent, const Magnitude& factor);
Magnitude magnitude_sum(const std::vector<Magnitude>& terms);

enum class ApproximationOrder { FunctionFirst, FunctionalFirst };

struct ScalingConstants {
  double C = 1.0;
  double C_prime = 1.0;
  double C_double_prime = 1.0;
  double C_delta = 1.0;
  double C_zeta = 1.0;
  double gamma_U = 1.0;  // discretization domains are [-gamma, gamma]^d
  double gamma_W = 1.0;
};

struct ScalingQuery {
  int d_U = 1;
  int d_V = 1;
  std::optional<int> d_W;
  double epsilon = 0.5;
  ScalingConstants constants;
  ApproximationOrder order = ApproximationOrder::FunctionFirst;

  void validate() const;
};

/// Size of one network class F_NN(d1, 1, L, p, K, kappa, R).
struct NetworkClassSize {
  Magnitude input_dim;
  Magnitude depth;      // L
  int width = 1;        // p
  Magnitude sparsity;   // K
  Magnitude kappa;
  double output_bound = 1.0;  // R
};

enum class BlowupSide { Branch, Trunk };
std::string_view to_string(BlowupSide s);

struct SizeReport {
  bool multi = false;
  ApproximationOrder order = ApproximationOrder::FunctionFirst;
  int d_U = 1, d_V = 1;
  std::optional<int> d_W;
  double epsilon = 0.0;

  Magnitude N;
  Magnitude H;
  std::optional<Magnitude> P;
  double delta = 0.0;        // may underflow to 0; see log10_delta
  double log10_delta = 0.0;
  std::optional<double> zeta;
  Magnitude n_cU;
  std::optional<Magnitude> n_cW;

  NetworkClassSize F1;  // trunk (space) networks
  NetworkClassSize F2;  // branch (function) networks
  std::optional<NetworkClassSize> F3;  // parameter networks

  std::vector<Magnitude> terms;  // N^dV K1, H^n_cU K2 [, P^n_cW K3]
  Magnitude total;               // N_#
  BlowupSide blowup_side = BlowupSide::Branch;
};

/// Lattice count ceil(gamma*sqrt(d)/r)^d of r-balls covering [-gamma, gamma]^d.
Magnitude cover_count(int d, double gamma, double radius);

SizeReport scaling_single(const ScalingQuery& q);
SizeReport scaling_multi(const ScalingQuery& q);

/// Recomputes N_# from the report's counts and class sizes.
Magnitude recompose_total(const SizeReport& r);

void print_size_report(const SizeReport& r, std::ostream& out);
void write_size_report_csv(const SizeReport& r, std::ostream& out);

enum class ScalingRegime { SingleFunctionFirst, SingleFunctionalFirst, Multi };

/// Leading-order accuracy reachable with n_params parameters.
double epsilon_of_nparams(const Magnitude& n_params, ScalingRegime regime, int d_U, int d_V,
                          std::optional<int> d_W = {});
double epsilon_of_nparams(double n_params, ScalingRegime regime, int d_U, int d_V, std::optional<int> d_W = {});

}  // namespace molab
