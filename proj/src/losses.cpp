#include "eqhess/losses.hpp"

#include <cmath>
#include <fmt/format.h>

#include "eqhess/error.hpp"

namespace eqhess {

namespace {

void check_shapes(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  require(pred.rows() == truth.rows() && pred.cols() == truth.cols(),
          fmt::format("loss shape mismatch: {}x{} vs {}x{}", pred.rows(), pred.cols(), truth.rows(),
                      truth.cols()));
  require(pred.size() > 0, "loss of an empty matrix");
}

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

struct Subspace {
  Eigen::MatrixXd vectors;  // n x k
  Eigen::VectorXd values;   // k
  bool degenerate_boundary = false;
};

Subspace lowest_subspace(const Eigen::MatrixXd& truth, int k) {
  require(truth.rows() == truth.cols(), "subspace loss needs a square matrix");
  require(k >= 1 && k <= truth.rows(),
          fmt::format("subspace size {} outside 1..{}", k, truth.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(truth);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the true Hessian failed");
  Subspace s{eig.eigenvectors().leftCols(k), eig.eigenvalues().head(k), false};
  if (k < truth.rows()) s.degenerate_boundary = eig.eigenvalues()(k) - eig.eigenvalues()(k - 1) < 1e-8;
  return s;
}

}  // namespace

void LossConfig::validate() const {
  require(subspace_k > 6, "subspace size k must exceed 6");
  require(std::isfinite(subspace_weight) && subspace_weight >= 0.0,
          "subspace weight must be finite and non-negative");
}

double loss_elementwise(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, ElementwiseKind kind) {
  check_shapes(pred, truth);
  const auto diff = (pred - truth).array();
  return kind == ElementwiseKind::mae ? diff.abs().mean() : diff.square().mean();
}

double loss_subspace(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, int k) {
  check_shapes(pred, truth);
  const Subspace s = lowest_subspace(truth, k);
  Eigen::MatrixXd residual = s.vectors.transpose() * pred * s.vectors;
  residual.diagonal() -= s.values;
  return residual.cwiseAbs().mean();
}

double loss_total(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, const LossConfig& cfg) {
  double loss = loss_elementwise(pred, truth, cfg.kind);
  if (cfg.subspace_weight != 0.0) loss += cfg.subspace_weight * loss_subspace(pred, truth, cfg.subspace_k);
  return loss;
}

LossGradient loss_with_gradient(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                                const LossConfig& cfg) {
  check_shapes(pred, truth);
  LossGradient out;
  const double n = static_cast<double>(pred.size());
  const Eigen::MatrixXd diff = pred - truth;
  if (cfg.kind == ElementwiseKind::mae) {
    out.value = diff.cwiseAbs().mean();
    out.d_pred = diff.unaryExpr([](double x) { return sign(x); }) / n;
  } else {
    out.value = diff.squaredNorm() / n;
    out.d_pred = 2.0 * diff / n;
  }
  if (cfg.subspace_weight == 0.0) return out;

  const Subspace s = lowest_subspace(truth, cfg.subspace_k);
  if (s.degenerate_boundary) {
    out.subspace_fallback = true;
    return out;
  }
  Eigen::MatrixXd residual = s.vectors.transpose() * pred * s.vectors;
  residual.diagonal() -= s.values;
  const double kk = static_cast<double>(residual.size());
  out.value += cfg.subspace_weight * residual.cwiseAbs().mean();
  const Eigen::MatrixXd g = residual.unaryExpr([](double x) { return sign(x); }) / kk;
  out.d_pred += cfg.subspace_weight * s.vectors * g * s.vectors.transpose();
  return out;
}

}  // namespace eqhess
