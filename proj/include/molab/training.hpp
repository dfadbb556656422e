#pragma once

// MSE training with AdamW, warmup + cosine schedule and global-norm clipping.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "molab/architectures.hpp"
#include "molab/dataset.hpp"

namespace molab {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::string scheduler = "cosine";  // cosine | constant
  double warmup_fraction = 0.10;
  double weight_decay = 1e-4;
  double grad_clip_norm = 1.0;
  int batch_data = 150;
  int batch_task = 5;
  int epochs = 50;
  int steps_per_epoch = 2000;
  std::uint64_t seed = 0;

  void validate() const;
  std::int64_t total_steps() const { return static_cast<std::int64_t>(epochs) * steps_per_epoch; }
};

struct LossResult {
  double loss = 0.0;
  VectorXd grad;
};

/// (1/n) sum (pred - target)^2 and its gradient (2/n)(pred - target).
LossResult mse_loss(const VectorXd& pred, const VectorXd& target);

std::int64_t warmup_steps(std::int64_t total_steps, const TrainConfig& config);
double lr_schedule(std::int64_t step, std::int64_t total_steps, const TrainConfig& config);

/// A named contiguous block of doubles inside a parameter or gradient set.
struct ParamBlock {
  std::string name;
  double* data;
  Eigen::Index size;
};
std::vector<ParamBlock> parameter_blocks(MlpParameters<double>& net, const std::string& prefix = "");
std::vector<ParamBlock> parameter_blocks(ModelState& model);
std::vector<ParamBlock> parameter_blocks(ModelGradients& grads);

double global_norm(const std::vector<ParamBlock>& blocks);

/// Scales the blocks in place when their joint L2 norm exceeds max_norm.
/// Returns the norm before clipping. Throws DomainError naming the first
/// block that holds a NaN or infinity.
double clip_global_norm(std::vector<ParamBlock> blocks, double max_norm);
double clip_global_norm(ModelGradients& grads, double max_norm);

struct AdamWState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<VectorXd> m;
  std::vector<VectorXd> v;
};

/// One decoupled-decay Adam update. Moments are created on the first call.
void adamw_step(const std::vector<ParamBlock>& params, const std::vector<ParamBlock>& grads, AdamWState& state,
                double lr, double weight_decay);
void adamw_step(ModelState& model, ModelGradients& grads, AdamWState& state, double lr, double weight_decay);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ModelState model;
  std::vector<double> loss_history;  // per-epoch mean batch loss
  std::vector<EpochStats> epochs;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Checks that a model's input sizes fit the dataset family.
void check_compatible(const ModelState& model, const DatasetSplit& split);

TrainResult train(ModelState model, const DatasetSplit& split, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

void write_training_log(const std::vector<EpochStats>& epochs, const std::string& path);

}  // namespace molab
