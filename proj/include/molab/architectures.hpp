#pragma once

// Operator-network combiners built from core MLPs.
//
// Every architecture evaluates as  y = sum_k c_k(alpha, u) * tau_k(t, x),
// where tau is the trunk bank and c is a head-specific combination of the
// branch bank b(u) and, where present, the parameter bank l(alpha):
//
//   DeepONet     c_k = b_k(u)
//   DeepONet-C   c_k = b_k([alpha; u])
//   MIONet       c_k = l_k(alpha) b_k(u)
//   MONet        c_k = sum_i b_ki(u) L_ki(alpha)          (b, L emit N*M values)
//   MNO          c_k = sum_p l_p(alpha) b_pk(u)           (b emits P*H values)
//
// Banks are single multi-output MLPs; output index of b_ki is k*M + i and of
// b_pk is p*H + k.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molab/core/mlp.hpp"

namespace molab {

enum class ArchitectureKind : std::uint8_t { DeepONet = 0, DeepONetC = 1, MIONet = 2, MONet = 3, MNO = 4 };

std::string_view to_string(ArchitectureKind kind);

/// Depth counts affine layers.
struct SubnetShape {
  int depth = 1;
  int width = 1;
};

struct ArchitectureSpec {
  ArchitectureKind kind = ArchitectureKind::DeepONet;
  int trunk_count = 20;                 // N (for MNO equal to H)
  int branch_count = 20;                // M for MONet, H for MNO, N otherwise
  std::optional<int> param_net_count;   // P; present iff MONet or MNO
  bool per_p_trunks = false;            // MNO: separate trunks tau_pk per p
  SubnetShape trunk{6, 64};
  SubnetShape branch{4, 64};
  SubnetShape param{4, 64};
  int u_sensors = 64;
  int alpha_dim = 0;

  bool has_param_net() const { return kind == ArchitectureKind::MIONet || kind == ArchitectureKind::MONet ||
                                      kind == ArchitectureKind::MNO; }
  int trunk_outputs() const;
  int branch_outputs() const;
  int param_outputs() const;
  int branch_input_dim() const;
  int param_input_dim() const { return alpha_dim; }

  void validate() const;
};

struct ModelState {
  ArchitectureSpec spec;
  MlpParameters<double> trunk;
  MlpParameters<double> branch;
  std::optional<MlpParameters<double>> param;

  Eigen::Index parameter_count() const {
    return trunk.parameter_count() + branch.parameter_count() + (param ? param->parameter_count() : 0);
  }
  bool operator==(const ModelState& o) const {
    return trunk == o.trunk && branch == o.branch && param == o.param;
  }
};

/// Gradients for every subnetwork of a ModelState.
struct ModelGradients {
  GradientSet<double> trunk;
  GradientSet<double> branch;
  std::optional<GradientSet<double>> param;

  static ModelGradients zeros_like(const ModelState& m);
  ModelGradients& operator+=(const ModelGradients& o);
};

/// Random initialization of all subnetworks (He init, zero biases).
ModelState init_model(const ArchitectureSpec& spec, std::uint64_t seed);

/// Checks that subnetwork shapes agree with the spec.
void check_model(const ModelState& model);

/// A batch of operator queries; one query per column.
struct OperatorBatch {
  MatrixXd alpha;  // alpha_dim x B (may have zero rows)
  MatrixXd u;      // u_sensors x B
  MatrixXd x;      // 2 x B, rows (t, x)

  Eigen::Index size() const { return x.cols(); }
};

VectorXd predict_batch(const ModelState& model, const OperatorBatch& batch);

/// Predictions together with the exact gradient of sum_b upstream_b * y_b.
struct BatchBackward {
  VectorXd predictions;
  ModelGradients grads;
};
BatchBackward backward_batch(const ModelState& model, const OperatorBatch& batch, const VectorXd& upstream);

/// Single-query gradient of upstream * G[alpha][u](x).
ModelGradients architecture_backward(const ModelState& model, const VectorXd& alpha, const VectorXd& u,
                                     const VectorXd& x, double upstream);

double evaluate_point(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x);

double deeponet_eval(const ModelState& model, const VectorXd& u, const VectorXd& x);
double deeponet_concat_eval(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x);
double mionet_eval(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x);
double monet_eval(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x);
double mno_eval(const ModelState& model, const VectorXd& alpha, const VectorXd& u, const VectorXd& x);

/// Trunk bank outputs at the given (t, x) points (trunk_outputs x G).
MatrixXd trunk_features(const ModelState& model, const MatrixXd& points);

/// Coefficients c(alpha, u) multiplying the trunk outputs (trunk_outputs).
VectorXd trunk_coefficients(const ModelState& model, const VectorXd& alpha, const VectorXd& u);

/// Field values sum_k c_k tau_k at every column of precomputed trunk features.
VectorXd predict_with_features(const ModelState& model, const VectorXd& alpha, const VectorXd& u,
                               const MatrixXd& features);

/// Gram-Schmidt coefficients Z such that the rows of Z * tau(.) are orthonormal
/// under <f, g> = (1/|Q|) sum_q f(q) g(q). Z is lower triangular.
/// Throws DomainError naming the first linearly dependent trunk.
MatrixXd gram_schmidt_trunks(const ModelState& model, const MatrixXd& quadrature_points);

/// Equivalent model whose trunks are Z * tau and whose coefficient side is
/// Z^{-T} * c. MONet grows its branch count from M to N*M. Not defined for
/// MIONet or per-p MNO trunks.
ModelState apply_trunk_transform(const ModelState& model, const MatrixXd& z);

enum class PresetScale { Paper, Desk };

/// Named configurations: deeponet, deeponet-c, mionet, monet, mno-s, mno-l.
/// Widths are fitted so the total parameter count approaches the preset budget.
ArchitectureSpec make_preset(std::string_view name, int alpha_dim, PresetScale scale = PresetScale::Paper,
                             int u_sensors = 64);
std::vector<std::string> preset_names();
std::int64_t preset_target_parameters(std::string_view name, PresetScale scale);
std::int64_t count_parameters(const ArchitectureSpec& spec);

/// Model checkpoint: "MOLA1" architecture header followed by one network
/// container per subnetwork (trunk, branch, [param]).
void write_model(const std::string& path, const ModelState& model, std::optional<std::uint8_t> family_tag = {});
struct ModelFile {
  ModelState model;
  std::optional<std::uint8_t> family_tag;
};
ModelFile read_model(const std::string& path);

}  // namespace molab
