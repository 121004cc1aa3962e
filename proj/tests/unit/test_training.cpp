#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "eqhess/error.hpp"
#include "eqhess/potentials.hpp"
#include "eqhess/training.hpp"
#include "fixtures.hpp"
#include "test_support.hpp"

using namespace eqhess;
using namespace eqhess::testutil;

namespace {

std::vector<Sample> lj_samples(int n_atoms, int count, std::uint64_t seed, double noise = 0.15) {
  PotentialSpec spec;
  spec.kind = PotentialKind::lennard_jones;
  DatasetSpec ds;
  ds.n_samples = count;
  ds.noise = noise;
  ds.seed = seed;
  return gen_dataset(spec, reference_cluster(n_atoms, 2.8), ds);
}

double sample_loss(const HessianModel& model, const Sample& s, const ModelParams& p, const LossConfig& loss) {
  return loss_total(model.predict_hessian(s.molecule, p), s.hessian, loss);
}

// Central difference of the loss along one flattened parameter coordinate.
double fd_coordinate(const HessianModel& model, const Sample& s, const ModelParams& p, const LossConfig& loss,
                     std::size_t index, double h) {
  std::vector<double> flat = p.flatten();
  ModelParams q = p;
  const double x0 = flat[index];
  flat[index] = x0 + h;
  q.unflatten(flat);
  const double up = sample_loss(model, s, q, loss);
  flat[index] = x0 - h;
  q.unflatten(flat);
  const double dn = sample_loss(model, s, q, loss);
  return (up - dn) / (2 * h);
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + 1e-10; }

}  // namespace

TEST(GradParams, MatchesFiniteDifferencesPerTensor) {
  const ModelConfig cfg = small_config();
  const HessianModel model(cfg);
  const ModelParams p = ModelParams::init(cfg, 21);
  const Sample s = lj_samples(3, 1, 4)[0];
  for (ElementwiseKind kind : {ElementwiseKind::mae, ElementwiseKind::mse}) {
    LossConfig loss;
    loss.kind = kind;
    loss.subspace_k = 7;
    const SampleGradient g = grad_params(model, s, p, loss);
    EXPECT_NEAR(g.loss, sample_loss(model, s, p, loss), 1e-12);
    const auto flat = g.grad.flatten();
    std::mt19937_64 rng(5);
    int checked = 0, failed = 0;
    for (const auto& t : p.layout()) {
      const std::size_t size = static_cast<std::size_t>(t.rows * t.cols);
      std::uniform_int_distribution<std::size_t> pick(0, size - 1);
      for (int trial = 0; trial < std::min<int>(4, static_cast<int>(size)); ++trial) {
        const std::size_t idx = static_cast<std::size_t>(t.offset) + pick(rng);
        const double fd = fd_coordinate(model, s, p, loss, idx, 1e-4);
        ++checked;
        if (!close(flat[idx], fd, 1e-4)) {
          ++failed;
          ADD_FAILURE() << t.name << "[" << idx - t.offset << "] analytic " << flat[idx] << " fd " << fd;
        }
      }
    }
    EXPECT_GT(checked, 40);
    EXPECT_EQ(failed, 0);
  }
}

TEST(GradParams, ZeroModelMatchesFiniteDifferences) {
  const ModelConfig cfg = small_config();
  const HessianModel model(cfg);
  ModelParams p = ModelParams::zeros(cfg);
  p.output_scale = 1.0;
  const Sample s = lj_samples(3, 1, 6)[0];
  LossConfig loss;
  loss.subspace_k = 7;
  EXPECT_TRUE(model.predict_hessian(s.molecule, p).isZero(0.0));
  const auto flat = grad_params(model, s, p, loss).grad.flatten();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, flat.size() - 1);
  for (int trial = 0; trial < 64; ++trial) {
    const std::size_t idx = pick(rng);
    const double fd = fd_coordinate(model, s, p, loss, idx, 1e-4);
    EXPECT_TRUE(close(flat[idx], fd, 1e-4)) << idx << " analytic " << flat[idx] << " fd " << fd;
  }
}

TEST(GradParams, UnusedSpeciesHasZeroGradient) {
  const ModelConfig cfg = small_config();
  const HessianModel model(cfg);
  const ModelParams p = ModelParams::init(cfg, 3);
  const Sample s = lj_samples(3, 1, 8)[0];
  LossConfig loss;
  loss.subspace_k = 7;
  const SampleGradient g = grad_params(model, s, p, loss);
  const int used = s.molecule.atomic_numbers[0] - 1;
  for (Eigen::Index z = 0; z < g.grad.species.rows(); ++z) {
    if (z == used) {
      EXPECT_GT(g.grad.species.row(z).norm(), 0.0);
    } else {
      EXPECT_TRUE(g.grad.species.row(z).isZero(0.0)) << z;
    }
  }
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  const ModelConfig cfg = small_config();
  const HessianModel model(cfg);
  const ModelParams init = ModelParams::init(cfg, 2);
  const auto data = lj_samples(4, 6, 1);
  TrainConfig tc;
  tc.steps = 5;
  tc.batch_size = 2;
  tc.learning_rate = 0.0;
  const TrainResult r = train(model, data, {}, init, LossConfig{}, tc);
  EXPECT_TRUE(r.params.flatten() == init.flatten());
  EXPECT_DOUBLE_EQ(r.params.output_scale, init.output_scale);
  EXPECT_FALSE(r.curve.empty());
}

TEST(Train, DeterministicForFixedSeed) {
  const ModelConfig cfg = small_config();
  const HessianModel model(cfg);
  const auto data = lj_samples(4, 6, 2);
  TrainConfig tc;
  tc.steps = 6;
  tc.batch_size = 4;
  tc.seed = 17;
  const TrainResult a = train(model, data, data, ModelParams::init(cfg, 1), LossConfig{}, tc);
  const TrainResult b = train(model, data, data, ModelParams::init(cfg, 1), LossConfig{}, tc);
  EXPECT_TRUE(a.params.flatten() == b.params.flatten());
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) EXPECT_EQ(a.curve[i].validation, b.curve[i].validation);
}

TEST(Train, EmitsOneCurvePointPerEpoch) {
  const ModelConfig cfg = small_config();
  const HessianModel model(cfg);
  const auto data = lj_samples(4, 5, 3);
  TrainConfig tc;
  tc.steps = 9;
  tc.batch_size = 2;
  int seen = 0;
  const TrainResult r =
      train(model, data, data, ModelParams::init(cfg, 1), LossConfig{}, tc, [&](const EpochLoss&) { ++seen; });
  // Five samples in batches of two: three steps per epoch.
  EXPECT_EQ(r.curve.size(), 3u);
  EXPECT_EQ(seen, 3);
  EXPECT_EQ(r.curve.back().step, 9);
}

TEST(Train, RejectsEmptyDatasetAndBadConfig) {
  const ModelConfig cfg = small_config();
  const HessianModel model(cfg);
  TrainConfig tc;
  EXPECT_THROW(train(model, {}, {}, ModelParams::init(cfg, 1), LossConfig{}, tc), InvalidInput);
  tc.batch_size = 0;
  EXPECT_THROW(train(model, lj_samples(4, 2, 1), {}, ModelParams::init(cfg, 1), LossConfig{}, tc), InvalidInput);
}

TEST(Train, SingleSampleOverfit) {
  const ModelConfig cfg;
  const HessianModel model(cfg);
  const auto data = lj_samples(4, 1, 4);
  TrainConfig tc;
  tc.steps = 2000;
  tc.batch_size = 1;
  tc.learning_rate = 2e-2;
  tc.decay_every = 200;
  const TrainResult r = train(model, data, data, ModelParams::init(cfg, 0), LossConfig{}, tc);
  const double final_loss = dataset_loss(model, data, r.params, LossConfig{}, r.target_scale);
  EXPECT_LE(final_loss, 1e-3 * r.initial_train) << "initial " << r.initial_train << " final " << final_loss;
}
