#pragma once

// Dense feedforward ReLU networks with exact reverse-mode gradients.
//
// A network with L affine layers computes
//   q(x) = W_L * ReLU(W_{L-1} * ... ReLU(W_1 x + b_1) ... + b_{L-1}) + b_L.
// Batched entry points take one sample per column.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "molab/errors.hpp"

namespace molab {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Mat<double>;
using VectorXd = Vec<double>;

/// Description of a network class F_NN(d1, d2, L, p, K, kappa, R).
/// Unset optionals mean "unbounded".
struct NetworkClassSpec {
  int input_dim = 1;
  int output_dim = 1;
  int depth = 1;
  int width = 1;
  std::optional<std::int64_t> sparsity_budget;
  std::optional<double> weight_bound;
  std::optional<double> output_bound;

  void validate() const {
    if (input_dim < 1 || output_dim < 1 || width < 1)
      throw DomainError("network class dimensions must be >= 1");
    if (depth < 1) throw DomainError("network depth L must be >= 1");
    if (sparsity_budget && *sparsity_budget < 1) throw DomainError("sparsity budget K must be >= 1");
    if (weight_bound && !(*weight_bound > 0)) throw DomainError("weight bound kappa must be > 0");
    if (output_bound && !(*output_bound > 0)) throw DomainError("output bound R must be > 0");
  }
};

template <typename Scalar>
struct DenseLayer {
  Mat<Scalar> weight;  // fan_out x fan_in
  Vec<Scalar> bias;    // fan_out

  bool operator==(const DenseLayer&) const = default;
};

/// Weights and biases of one MLP. Also used as the gradient container,
/// since gradients are shape-congruent with the parameters.
template <typename Scalar>
struct MlpParameters {
  std::vector<DenseLayer<Scalar>> layers;

  int depth() const { return static_cast<int>(layers.size()); }
  int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols()); }
  int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows()); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  static MlpParameters zeros_like(const MlpParameters& other) {
    MlpParameters z;
    z.layers.reserve(other.layers.size());
    for (const auto& l : other.layers)
      z.layers.push_back({Mat<Scalar>::Zero(l.weight.rows(), l.weight.cols()),
                          Vec<Scalar>::Zero(l.bias.size())});
    return z;
  }

  bool same_shape(const MlpParameters& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].weight.rows() != other.layers[i].weight.rows() ||
          layers[i].weight.cols() != other.layers[i].weight.cols() ||
          layers[i].bias.size() != other.layers[i].bias.size())
        return false;
    }
    return true;
  }

  MlpParameters& operator+=(const MlpParameters& other) {
    if (!same_shape(other)) throw DimensionError("parameter sets are not shape-congruent");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].weight += other.layers[i].weight;
      layers[i].bias += other.layers[i].bias;
    }
    return *this;
  }

  MlpParameters& operator*=(Scalar c) {
    for (auto& l : layers) {
      l.weight *= c;
      l.bias *= c;
    }
    return *this;
  }

  bool operator==(const MlpParameters&) const = default;
};

template <typename Scalar>
using GradientSet = MlpParameters<Scalar>;

/// He-initialized network: weights ~ N(0, 2/fan_in), biases zero.
template <typename Scalar = double>
MlpParameters<Scalar> init_network(const NetworkClassSpec& spec, std::span<const int> hidden_widths,
                                   std::uint64_t seed) {
  spec.validate();
  if (static_cast<int>(hidden_widths.size()) != spec.depth - 1)
    throw DimensionError("expected " + std::to_string(spec.depth - 1) + " hidden widths, got " +
                         std::to_string(hidden_widths.size()));
  std::vector<int> widths;
  widths.push_back(spec.input_dim);
  for (int w : hidden_widths) {
    if (w < 1) throw DomainError("hidden width must be >= 1");
    if (w > spec.width)
      throw DomainError("hidden width " + std::to_string(w) + " exceeds class width p=" +
                        std::to_string(spec.width));
    widths.push_back(w);
  }
  widths.push_back(spec.output_dim);

  std::mt19937_64 rng(seed);
  MlpParameters<Scalar> params;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
    DenseLayer<Scalar> layer{Mat<Scalar>(fan_out, fan_in), Vec<Scalar>::Zero(fan_out)};
    for (int c = 0; c < fan_in; ++c)
      for (int r = 0; r < fan_out; ++r) layer.weight(r, c) = static_cast<Scalar>(normal(rng));
    params.layers.push_back(std::move(layer));
  }
  return params;
}

template <typename Scalar = double>
MlpParameters<Scalar> init_network(const NetworkClassSpec& spec, std::initializer_list<int> hidden_widths,
                                   std::uint64_t seed) {
  std::vector<int> w(hidden_widths);
  return init_network<Scalar>(spec, std::span<const int>(w), seed);
}

/// Cached intermediate values of a batched forward pass.
template <typename Scalar>
struct ForwardTrace {
  std::vector<Mat<Scalar>> inputs;  // inputs[l] feeds layer l; inputs[0] is the batch itself
  std::vector<Mat<Scalar>> pre;     // pre-activations of hidden layers
};

namespace detail {
template <typename Scalar>
void check_input(const MlpParameters<Scalar>& params, Eigen::Index rows) {
  if (params.layers.empty()) throw DimensionError("network has no layers");
  if (rows != params.input_dim())
    throw DimensionError("input has dimension " + std::to_string(rows) + ", network expects " +
                         std::to_string(params.input_dim()));
}
}  // namespace detail

template <typename Scalar>
Mat<Scalar> forward_batch(const MlpParameters<Scalar>& params, const Mat<Scalar>& x,
                          ForwardTrace<Scalar>* trace = nullptr) {
  detail::check_input(params, x.rows());
  if (trace) {
    trace->inputs.assign(1, x);
    trace->pre.clear();
  }
  Mat<Scalar> a = x;
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Mat<Scalar> z = layer.weight * a;
    z.colwise() += layer.bias;
    if (l == last) return z;
    if (trace) trace->pre.push_back(z);
    a = z.cwiseMax(Scalar(0));
    if (trace) trace->inputs.push_back(a);
  }
  return a;  // unreachable
}

template <typename Scalar>
Vec<Scalar> forward(const MlpParameters<Scalar>& params, const Vec<Scalar>& x) {
  return forward_batch(params, Mat<Scalar>(x)).col(0);
}

template <typename Scalar>
struct BackwardResult {
  GradientSet<Scalar> grads;
  Mat<Scalar> input_grad;  // d1 x batch
};

/// Gradients of sum_b upstream(:,b) . q(x_b) with respect to every
/// parameter (summed over the batch) and to each input column.
/// The ReLU subgradient at 0 is 0.
template <typename Scalar>
BackwardResult<Scalar> backward_batch(const MlpParameters<Scalar>& params, const ForwardTrace<Scalar>& trace,
                                      const Mat<Scalar>& upstream) {
  const std::size_t depth = params.layers.size();
  if (trace.inputs.size() != depth || trace.pre.size() + 1 != depth)
    throw DimensionError("forward trace does not match network depth");
  if (upstream.rows() != params.output_dim() || upstream.cols() != trace.inputs[0].cols())
    throw DimensionError("upstream gradient shape does not match network output");

  BackwardResult<Scalar> out;
  out.grads.layers.resize(depth);
  Mat<Scalar> delta = upstream;
  for (std::size_t l = depth; l-- > 0;) {
    const auto& layer = params.layers[l];
    out.grads.layers[l].weight.noalias() = delta * trace.inputs[l].transpose();
    out.grads.layers[l].bias = delta.rowwise().sum();
    Mat<Scalar> back = layer.weight.transpose() * delta;
    if (l == 0) {
      out.input_grad = std::move(back);
    } else {
      delta = (trace.pre[l - 1].array() > Scalar(0)).select(back, Scalar(0));
    }
  }
  return out;
}

template <typename Scalar>
BackwardResult<Scalar> backward(const MlpParameters<Scalar>& params, const Vec<Scalar>& x,
                                const Vec<Scalar>& upstream) {
  ForwardTrace<Scalar> trace;
  forward_batch(params, Mat<Scalar>(x), &trace);
  if (upstream.size() != params.output_dim())
    throw DimensionError("upstream has dimension " + std::to_string(upstream.size()) + ", network outputs " +
                         std::to_string(params.output_dim()));
  return backward_batch(params, trace, Mat<Scalar>(upstream));
}

/// Outcome of checking a parameter set against the finite bounds of a class.
struct MembershipReport {
  bool member = true;
  std::string violation;
  double max_abs_parameter = 0.0;
  std::int64_t nonzero_count = 0;
  double max_abs_output = 0.0;
};

/// Checks shapes, ||W||_max <= kappa, ||b||_max <= kappa, nonzeros <= K and,
/// when probe inputs are given, |q(x)| <= R on those probes.
template <typename Scalar>
MembershipReport check_class_membership(const MlpParameters<Scalar>& params, const NetworkClassSpec& spec,
                                        const Mat<Scalar>* probes = nullptr) {
  MembershipReport r;
  auto fail = [&](std::string why) {
    if (r.member) r.violation = std::move(why);
    r.member = false;
  };
  if (params.depth() != spec.depth) fail("depth mismatch");
  if (params.input_dim() != spec.input_dim) fail("input dimension mismatch");
  if (params.output_dim() != spec.output_dim) fail("output dimension mismatch");
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l)
    if (params.layers[l].weight.rows() > spec.width) fail("hidden width exceeds p");

  for (const auto& l : params.layers) {
    if (l.weight.size()) r.max_abs_parameter = std::max<double>(r.max_abs_parameter, l.weight.cwiseAbs().maxCoeff());
    if (l.bias.size()) r.max_abs_parameter = std::max<double>(r.max_abs_parameter, l.bias.cwiseAbs().maxCoeff());
    r.nonzero_count += (l.weight.array() != Scalar(0)).count() + (l.bias.array() != Scalar(0)).count();
  }
  if (spec.weight_bound && r.max_abs_parameter > *spec.weight_bound) fail("parameter magnitude exceeds kappa");
  if (spec.sparsity_budget && r.nonzero_count > *spec.sparsity_budget) fail("nonzero count exceeds K");
  if (probes && probes->cols() > 0) {
    r.max_abs_output = static_cast<double>(forward_batch(params, *probes).cwiseAbs().maxCoeff());
    if (spec.output_bound && r.max_abs_output > *spec.output_bound) fail("output magnitude exceeds R");
  }
  return r;
}

}  // namespace molab
