#include "eqhess/training.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <random>

#include "eqhess/error.hpp"

namespace eqhess {

void validate(const Sample& sample) {
  validate(sample.molecule);
  const int n = 3 * sample.molecule.size();
  require(sample.hessian.rows() == n && sample.hessian.cols() == n,
          fmt::format("sample Hessian must be {}x{}", n, n));
  require(sample.forces.rows() == sample.molecule.size(), "sample forces have the wrong shape");
  require(sample.hessian.allFinite() && std::isfinite(sample.energy), "sample contains non-finite labels");
  const double asym = (sample.hessian - sample.hessian.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-8, fmt::format("sample Hessian asymmetric by {}", asym));
}

void TrainConfig::validate() const {
  require(steps >= 0, "steps must be non-negative");
  require(batch_size >= 1, "batch_size must be positive");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be non-negative");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(decay_every >= 1, "decay_every must be positive");
  require(decay_factor > 0.0 && decay_factor <= 1.0, "decay_factor must lie in (0, 1]");
  require(clip_norm > 0.0, "clip_norm must be positive");
}

SampleGradient grad_params(const HessianModel& model, const Sample& sample, const ModelParams& params,
                           const LossConfig& loss) {
  const Eigen::MatrixXd pred = model.predict_hessian(sample.molecule, params);
  const LossGradient lg = loss_with_gradient(pred, sample.hessian, loss);
  return {lg.value, model.hessian_vjp(sample.molecule, params, lg.d_pred), lg.subspace_fallback};
}

double hessian_rms(const std::vector<Sample>& samples) {
  double sum = 0.0;
  double count = 0.0;
  for (const auto& s : samples) {
    sum += s.hessian.squaredNorm();
    count += static_cast<double>(s.hessian.size());
  }
  require(count > 0.0, "empty dataset");
  return std::sqrt(sum / count);
}

double dataset_loss(const HessianModel& model, const std::vector<Sample>& samples, const ModelParams& params,
                    const LossConfig& loss, double scale) {
  require(!samples.empty(), "dataset_loss of an empty dataset");
  double total = 0.0;
  for (const auto& s : samples) {
    const Eigen::MatrixXd pred = model.predict_hessian(s.molecule, params) / scale;
    total += loss_with_gradient(pred, s.hessian / scale, loss).value;
  }
  return total / static_cast<double>(samples.size());
}

TrainResult train(const HessianModel& model, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& validation_set, ModelParams init, const LossConfig& loss,
                  const TrainConfig& cfg, const std::function<void(const EpochLoss&)>& on_epoch) {
  require(!train_set.empty(), "training set is empty");
  cfg.validate();
  loss.validate();
  for (const auto& s : train_set) validate(s);

  TrainResult result;
  result.target_scale = cfg.normalize_targets ? hessian_rms(train_set) : 1.0;
  require(result.target_scale > 0.0, "training targets are all zero");
  const double scale = result.target_scale;

  // Work in normalised units: targets / scale, model output_scale relative to that.
  std::vector<Sample> train_n = train_set;
  for (auto& s : train_n) s.hessian /= scale;
  std::vector<Sample> val_n = validation_set;
  for (auto& s : val_n) s.hessian /= scale;

  ModelParams params = std::move(init);
  const double base_output_scale = params.output_scale / scale;
  params.output_scale = base_output_scale;
  std::vector<double> theta = params.flatten();
  std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0), g(theta.size());
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  const auto& eval_set = val_n.empty() ? train_n : val_n;
  result.initial_validation = dataset_loss(model, eval_set, params, loss);
  result.initial_train = dataset_loss(model, train_n, params, loss);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_n.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  int epoch = 0;
  double epoch_loss = 0.0;
  int epoch_batches = 0;

  auto finish_epoch = [&](int step) {
    ++epoch;
    const EpochLoss point{epoch, step, epoch_loss / std::max(epoch_batches, 1),
                          dataset_loss(model, eval_set, params, loss)};
    result.curve.push_back(point);
    if (on_epoch) on_epoch(point);
    epoch_loss = 0.0;
    epoch_batches = 0;
  };

  for (int step = 0; step < cfg.steps; ++step) {
    if (cursor >= order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    std::fill(g.begin(), g.end(), 0.0);
    const std::size_t batch_end = std::min(order.size(), cursor + static_cast<std::size_t>(cfg.batch_size));
    const double inv_batch = 1.0 / static_cast<double>(batch_end - cursor);
    double batch_loss = 0.0;
    for (; cursor < batch_end; ++cursor) {
      const Sample& s = train_n[order[cursor]];
      SampleGradient sg = grad_params(model, s, params, loss);
      if (!std::isfinite(sg.loss))
        throw NumericalError(fmt::format("non-finite loss at step {} on sample {}", step, order[cursor]));
      result.subspace_fallbacks += sg.subspace_fallback ? 1 : 0;
      batch_loss += sg.loss * inv_batch;
      const auto flat = sg.grad.flatten();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += flat[i] * inv_batch;
    }
    epoch_loss += batch_loss;
    ++epoch_batches;

    double norm = 0.0;
    for (double x : g) norm += x * x;
    norm = std::sqrt(norm);
    if (!std::isfinite(norm)) throw NumericalError(fmt::format("non-finite gradient at step {}", step));
    if (norm > cfg.clip_norm)
      for (double& x : g) x *= cfg.clip_norm / norm;

    const double lr = cfg.learning_rate * std::pow(cfg.decay_factor, step / cfg.decay_every);
    const double bc1 = 1.0 - std::pow(beta1, step + 1);
    const double bc2 = 1.0 - std::pow(beta2, step + 1);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      if (cfg.optimizer == OptimizerKind::adamw) theta[i] -= lr * cfg.weight_decay * theta[i];
      theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
    params.unflatten(theta);
    params.output_scale = base_output_scale;

    if (cursor >= order.size() || step + 1 == cfg.steps) finish_epoch(step + 1);
  }

  params.output_scale = base_output_scale * scale;
  result.params = std::move(params);
  return result;
}

}  // namespace eqhess
