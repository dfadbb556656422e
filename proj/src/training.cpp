#include "molab/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace molab {

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw DomainError("learning_rate must be positive");
  if (scheduler != "cosine" && scheduler != "constant")
    throw DomainError("scheduler must be cosine or constant, got '" + scheduler + "'");
  if (!(warmup_fraction >= 0 && warmup_fraction < 1)) throw DomainError("warmup_fraction must be in [0, 1)");
  if (!(weight_decay >= 0)) throw DomainError("weight_decay must be non-negative");
  if (!(grad_clip_norm > 0)) throw DomainError("grad_clip_norm must be positive");
  if (batch_data < 1 || batch_task < 1) throw DomainError("batch sizes must be positive");
  if (epochs < 1 || steps_per_epoch < 1) throw DomainError("epochs and steps_per_epoch must be positive");
}

LossResult mse_loss(const VectorXd& pred, const VectorXd& target) {
  if (pred.size() != target.size()) throw DimensionError("prediction and target lengths differ");
  if (pred.size() == 0) throw DimensionError("mse_loss needs at least one value");
  const double n = static_cast<double>(pred.size());
  const VectorXd diff = pred - target;
  return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

std::int64_t warmup_steps(std::int64_t total_steps, const TrainConfig& config) {
  return static_cast<std::int64_t>(std::ceil(config.warmup_fraction * static_cast<double>(total_steps)));
}

double lr_schedule(std::int64_t step, std::int64_t total_steps, const TrainConfig& config) {
  if (total_steps < 1 || step < 0 || step >= total_steps)
    throw DomainError("step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + ")");
  const std::int64_t w = warmup_steps(total_steps, config);
  if (step < w) return config.learning_rate * static_cast<double>(step) / static_cast<double>(w);
  if (config.scheduler == "constant") return config.learning_rate;
  const double progress = static_cast<double>(step - w) / static_cast<double>(total_steps - w);
  return config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<ParamBlock> parameter_blocks(MlpParameters<double>& net, const std::string& prefix) {
  std::vector<ParamBlock> out;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    out.push_back({prefix + "layer " + std::to_string(l) + " weight", layer.weight.data(), layer.weight.size()});
    out.push_back({prefix + "layer " + std::to_string(l) + " bias", layer.bias.data(), layer.bias.size()});
  }
  return out;
}

namespace {
template <class Trunk, class Branch, class Param>
std::vector<ParamBlock> three_nets(Trunk& t, Branch& b, Param& p) {
  auto out = parameter_blocks(t, "trunk ");
  auto bb = parameter_blocks(b, "branch ");
  out.insert(out.end(), bb.begin(), bb.end());
  if (p) {
    auto pb = parameter_blocks(*p, "parameter net ");
    out.insert(out.end(), pb.begin(), pb.end());
  }
  return out;
}
}  // namespace

std::vector<ParamBlock> parameter_blocks(ModelState& model) {
  return three_nets(model.trunk, model.branch, model.param);
}

std::vector<ParamBlock> parameter_blocks(ModelGradients& grads) {
  return three_nets(grads.trunk, grads.branch, grads.param);
}

double global_norm(const std::vector<ParamBlock>& blocks) {
  double sq = 0.0;
  for (const auto& b : blocks) sq += Eigen::Map<const VectorXd>(b.data, b.size).squaredNorm();
  return std::sqrt(sq);
}

double clip_global_norm(std::vector<ParamBlock> blocks, double max_norm) {
  if (!(max_norm > 0)) throw DomainError("max_norm must be positive");
  for (const auto& b : blocks)
    if (!Eigen::Map<const VectorXd>(b.data, b.size).allFinite())
      throw DomainError("non-finite gradient in " + b.name);
  const double norm = global_norm(blocks);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& b : blocks) Eigen::Map<VectorXd>(b.data, b.size) *= scale;
  }
  return norm;
}

double clip_global_norm(ModelGradients& grads, double max_norm) {
  return clip_global_norm(parameter_blocks(grads), max_norm);
}

void adamw_step(const std::vector<ParamBlock>& params, const std::vector<ParamBlock>& grads, AdamWState& state,
                double lr, double weight_decay) {
  if (params.size() != grads.size()) throw DimensionError("parameter and gradient block counts differ");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].size != grads[i].size) throw DimensionError("shape mismatch in " + params[i].name);
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(VectorXd::Zero(p.size));
      state.v.push_back(VectorXd::Zero(p.size));
    }
  } else if (state.m.size() != params.size()) {
    throw DimensionError("optimizer state does not match the parameter blocks");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::Map<VectorXd> p(params[i].data, params[i].size);
    Eigen::Map<const VectorXd> g(grads[i].data, grads[i].size);
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != p.size()) throw DimensionError("optimizer state shape mismatch in " + params[i].name);
    p *= 1.0 - lr * weight_decay;
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseAbs2();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  }
}

void adamw_step(ModelState& model, ModelGradients& grads, AdamWState& state, double lr, double weight_decay) {
  adamw_step(parameter_blocks(model), parameter_blocks(grads), state, lr, weight_decay);
}

void check_compatible(const ModelState& model, const DatasetSplit& split) {
  const auto& s = model.spec;
  if (s.u_sensors != grid::kUSensors)
    throw DimensionError("model expects " + std::to_string(s.u_sensors) + " u sensors, datasets provide " +
                         std::to_string(grid::kUSensors));
  if (s.kind != ArchitectureKind::DeepONet && s.alpha_dim != alpha_length(split.family))
    throw DimensionError("model expects alpha of length " + std::to_string(s.alpha_dim) + " but " +
                         std::string(to_string(split.family)) + " provides " +
                         std::to_string(alpha_length(split.family)));
}

TrainResult train(ModelState model, const DatasetSplit& split, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (split.samples.empty()) throw DomainError("training split is empty");
  if (split.samples.size() != static_cast<std::size_t>(split.n_alpha) * split.n_ic)
    throw DimensionError("split sample count does not equal n_alpha * n_ic");
  check_model(model);
  check_compatible(model, split);

  const int alpha_dim = model.spec.kind == ArchitectureKind::DeepONet ? 0 : model.spec.alpha_dim;
  const MatrixXd points = grid::eval_points();
  const int n_points = static_cast<int>(points.cols());
  const int tasks = std::min(config.batch_task, split.n_alpha);
  const int batch = config.batch_data;
  const std::int64_t total = config.total_steps();

  std::mt19937_64 rng(config.seed);
  std::vector<int> order(split.n_alpha);
  OperatorBatch ob{MatrixXd(alpha_dim, batch), MatrixXd(grid::kUSensors, batch), MatrixXd(2, batch)};
  VectorXd target(batch);
  AdamWState opt;

  TrainResult result;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    double lr = 0.0;
    for (int s = 0; s < config.steps_per_epoch; ++s, ++step) {
      for (int a = 0; a < split.n_alpha; ++a) order[a] = a;
      for (int k = 0; k < tasks; ++k) {
        std::uniform_int_distribution<int> pick(k, split.n_alpha - 1);
        std::swap(order[k], order[pick(rng)]);
      }
      std::uniform_int_distribution<int> pick_ic(0, split.n_ic - 1);
      std::uniform_int_distribution<int> pick_point(0, n_points - 1);
      int col = 0;
      for (int k = 0; k < tasks; ++k) {
        const int count = batch / tasks + (k < batch % tasks ? 1 : 0);
        for (int q = 0; q < count; ++q, ++col) {
          const int c = pick_ic(rng);
          const int g = pick_point(rng);
          const OperatorSample& smp = split.samples[static_cast<std::size_t>(order[k]) * split.n_ic + c];
          if (alpha_dim > 0) ob.alpha.col(col) = smp.alpha.values;
          ob.u.col(col) = smp.u_sensors;
          ob.x.col(col) = points.col(g);
          target(col) = smp.target.values(g / grid::kEvalNx, g % grid::kEvalNx);
        }
      }

      const VectorXd pred = predict_batch(model, ob);
      const LossResult loss = mse_loss(pred, target);
      if (!std::isfinite(loss.loss))
        throw Error("non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step));
      BatchBackward bw = backward_batch(model, ob, loss.grad);
      clip_global_norm(bw.grads, config.grad_clip_norm);
      lr = lr_schedule(step, total, config);
      adamw_step(model, bw.grads, opt, lr, config.weight_decay);
      loss_sum += loss.loss;
    }
    EpochStats st{epoch, loss_sum / config.steps_per_epoch, lr};
    result.loss_history.push_back(st.mean_loss);
    result.epochs.push_back(st);
    if (on_epoch) on_epoch(st);
  }
  result.model = std::move(model);
  return result;
}

void write_training_log(const std::vector<EpochStats>& epochs, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << "epoch,mean_loss,lr\n";
  char buf[96];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.mean_loss, e.lr);
    f << buf;
  }
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace molab
