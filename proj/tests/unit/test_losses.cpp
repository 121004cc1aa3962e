#include <gtest/gtest.h>

#include <random>

#include "eqhess/error.hpp"
#include "eqhess/irreps.hpp"
#include "eqhess/losses.hpp"
#include "fixtures.hpp"
#include "test_support.hpp"

using namespace eqhess;
using namespace eqhess::testutil;

namespace {

// Symmetric matrix with a well separated spectrum, so the k-boundary of the
// subspace is never degenerate.
Eigen::MatrixXd spread_symmetric(int n, std::mt19937_64& rng) {
  const Eigen::MatrixXd a = random_symmetric(n, rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = -2.0 + 0.37 * i;
  return q * d.asDiagonal() * q.transpose();
}

// Brute-force oracle: explicit eigen-pairs from a generic (non-symmetric)
// solver, sorted by hand, then the k x k residual by explicit loops.
double subspace_oracle(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, int k) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(truth);
  const int n = static_cast<int>(truth.rows());
  std::vector<std::pair<double, Eigen::VectorXd>> pairs;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = es.eigenvectors().col(i).real();
    pairs.emplace_back(es.eigenvalues()(i).real(), v.normalized());
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double sum = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      double proj = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) proj += pairs[a].second(i) * pred(i, j) * pairs[b].second(j);
      const double target = a == b ? pairs[a].first : 0.0;
      sum += std::abs(proj - target);
    }
  }
  return sum / (k * k);
}

}  // namespace

TEST(LossElementwise, ZeroForIdenticalInputs) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd h = random_symmetric(6, rng);
  EXPECT_EQ(loss_elementwise(h, h, ElementwiseKind::mae), 0.0);
  EXPECT_EQ(loss_elementwise(h, h, ElementwiseKind::mse), 0.0);
}

TEST(LossElementwise, ScalarCase) {
  const Eigen::MatrixXd p = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const Eigen::MatrixXd t = Eigen::MatrixXd::Constant(1, 1, 5.0);
  EXPECT_DOUBLE_EQ(loss_elementwise(p, t, ElementwiseKind::mae), 3.0);
  EXPECT_DOUBLE_EQ(loss_elementwise(p, t, ElementwiseKind::mse), 9.0);
}

TEST(LossElementwise, MatchesLoopOracle) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd p = random_symmetric(6, rng), t = random_symmetric(6, rng);
  double mae = 0.0, mse = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      mae += std::abs(p(i, j) - t(i, j));
      mse += (p(i, j) - t(i, j)) * (p(i, j) - t(i, j));
    }
  EXPECT_NEAR(loss_elementwise(p, t, ElementwiseKind::mae), mae / 36.0, 1e-15);
  EXPECT_NEAR(loss_elementwise(p, t, ElementwiseKind::mse), mse / 36.0, 1e-15);
}

TEST(LossElementwise, RejectsShapeMismatch) {
  EXPECT_THROW(loss_elementwise(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(6, 6), ElementwiseKind::mae),
               InvalidInput);
}

TEST(LossSubspace, ZeroAtTruth) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd h = random_symmetric(9, rng);
    EXPECT_LT(loss_subspace(h, h, 8), 1e-13);
  }
}

TEST(LossSubspace, ShiftedIdentityGivesShift) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd h = random_symmetric(9, rng);
  const double c = 0.731;
  EXPECT_NEAR(loss_subspace(h + c * Eigen::MatrixXd::Identity(9, 9), h, 8), c / 8.0, 1e-13);
}

TEST(LossSubspace, MatchesBruteForceOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd t = spread_symmetric(9, rng);
    const Eigen::MatrixXd p = random_symmetric(9, rng);
    EXPECT_NEAR(loss_subspace(p, t, 8), subspace_oracle(p, t, 8), 1e-10);
  }
}

TEST(LossSubspace, RejectsOversizedSubspace) {
  EXPECT_THROW(loss_subspace(Eigen::MatrixXd::Zero(6, 6), Eigen::MatrixXd::Zero(6, 6), 7), InvalidInput);
}

TEST(LossConfig, RequiresMoreThanSixModes) {
  LossConfig cfg;
  cfg.subspace_k = 6;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg.subspace_k = 7;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(LossTotal, WeightedSumOfComponents) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd p = random_symmetric(9, rng), t = spread_symmetric(9, rng);
  LossConfig cfg;
  cfg.subspace_weight = 0.0;
  EXPECT_DOUBLE_EQ(loss_total(p, t, cfg), loss_elementwise(p, t, ElementwiseKind::mae));
  cfg.subspace_weight = 1.0;
  EXPECT_NEAR(loss_total(p, t, cfg), loss_elementwise(p, t, ElementwiseKind::mae) + loss_subspace(p, t, 8), 1e-14);
  cfg.kind = ElementwiseKind::mse;
  cfg.subspace_weight = 2.5;
  EXPECT_NEAR(loss_total(p, t, cfg),
              loss_elementwise(p, t, ElementwiseKind::mse) + 2.5 * loss_subspace(p, t, 8), 1e-14);
}

TEST(LossTotal, MseWithSubspaceIsRotationInvariant) {
  std::mt19937_64 rng(7);
  LossConfig cfg;
  cfg.kind = ElementwiseKind::mse;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd t = spread_symmetric(9, rng);
    const Eigen::MatrixXd p = t + 0.3 * random_symmetric(9, rng);
    const Eigen::MatrixXd q = block_rotation(3, Rotation::random(rng));
    EXPECT_NEAR(loss_total(q * p * q.transpose(), q * t * q.transpose(), cfg), loss_total(p, t, cfg), 1e-9);
  }
}

TEST(LossTotal, MaeIsNotRotationInvariant) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(9, 9);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(9, 9);
  p(0, 0) = 1.0;
  const Eigen::MatrixXd q =
      block_rotation(3, Rotation::from_axis_angle(Eigen::Vector3d(0, 0, 1), std::numbers::pi / 4));
  const double before = loss_elementwise(p, t, ElementwiseKind::mae);
  const double after = loss_elementwise(q * p * q.transpose(), t, ElementwiseKind::mae);
  EXPECT_GT(std::abs(after - before), 1e-3);
}

TEST(LossGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  for (ElementwiseKind kind : {ElementwiseKind::mae, ElementwiseKind::mse}) {
    LossConfig cfg;
    cfg.kind = kind;
    const Eigen::MatrixXd t = spread_symmetric(9, rng);
    Eigen::MatrixXd p = t + random_symmetric(9, rng);
    const LossGradient g = loss_with_gradient(p, t, cfg);
    EXPECT_NEAR(g.value, loss_total(p, t, cfg), 1e-14);
    EXPECT_FALSE(g.subspace_fallback);
    const double h = 1e-6;
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) {
        Eigen::MatrixXd up = p, dn = p;
        up(i, j) += h;
        dn(i, j) -= h;
        const double fd = (loss_total(up, t, cfg) - loss_total(dn, t, cfg)) / (2 * h);
        EXPECT_NEAR(g.d_pred(i, j), fd, 1e-7) << i << "," << j;
      }
  }
}

TEST(LossGradient, DegenerateBoundaryFallsBack) {
  Eigen::VectorXd d(9);
  d << 0, 0, 0, 0, 0, 0, 0, 1, 1;
  const Eigen::MatrixXd t = d.asDiagonal();
  LossConfig cfg;
  const LossGradient g = loss_with_gradient(Eigen::MatrixXd::Identity(9, 9), t, cfg);
  EXPECT_TRUE(g.subspace_fallback);
  EXPECT_DOUBLE_EQ(g.value, loss_elementwise(Eigen::MatrixXd::Identity(9, 9), t, ElementwiseKind::mae));
}
