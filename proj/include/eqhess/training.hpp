#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "eqhess/losses.hpp"
#include "eqhess/model.hpp"
#include "eqhess/sample.hpp"

namespace eqhess {

struct SampleGradient {
  double loss = 0.0;
  ModelParams grad;
  bool subspace_fallback = false;
};

/// Exact gradient of loss_total(predict_hessian(sample), sample.hessian)
/// with respect to every learnable parameter.
SampleGradient grad_params(const HessianModel& model, const Sample& sample, const ModelParams& params,
                           const LossConfig& loss);

enum class OptimizerKind { adam, adamw };

struct TrainConfig {
  int steps = 5000;
  int batch_size = 8;
  double learning_rate = 2e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double weight_decay = 0.0;
  /// Learning rate is multiplied by decay_factor every decay_every steps.
  int decay_every = 1500;
  double decay_factor = 0.5;
  double clip_norm = 0.1;
  std::uint64_t seed = 0;
  /// Divide targets by the training-set Hessian RMS; the final parameters
  /// carry the factor back through output_scale.
  bool normalize_targets = true;

  void validate() const;
};

struct EpochLoss {
  int epoch;
  int step;
  double train;
  double validation;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLoss> curve;
  double initial_validation = 0.0;
  double initial_train = 0.0;
  double target_scale = 1.0;
  int subspace_fallbacks = 0;
};

/// Mean loss_total over samples, with both prediction and target divided by `scale`.
double dataset_loss(const HessianModel& model, const std::vector<Sample>& samples, const ModelParams& params,
                    const LossConfig& loss, double scale = 1.0);

double hessian_rms(const std::vector<Sample>& samples);

/// Mini-batch Adam/AdamW with step decay and gradient-norm clipping.
/// Deterministic for a fixed seed. Validation loss is evaluated after every
/// epoch; `on_epoch` (optional) sees each curve point as it is produced.
TrainResult train(const HessianModel& model, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& validation_set, ModelParams init, const LossConfig& loss,
                  const TrainConfig& cfg, const std::function<void(const EpochLoss&)>& on_epoch = {});

}  // namespace eqhess
