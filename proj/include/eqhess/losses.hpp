#pragma once

#include <Eigen/Dense>

namespace eqhess {

enum class ElementwiseKind { mae, mse };

struct LossConfig {
  ElementwiseKind kind = ElementwiseKind::mae;
  double subspace_weight = 1.0;
  int subspace_k = 8;

  void validate() const;
};

/// Mean over all entries of |pred - truth| or (pred - truth)^2.
double loss_elementwise(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, ElementwiseKind kind);

/// Mean absolute entry of V_k^T pred V_k - diag(lambda_1..k), where V_k holds
/// the k lowest eigenvectors of the true Hessian.
double loss_subspace(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, int k);

/// Elementwise loss plus subspace_weight times the subspace loss.
double loss_total(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, const LossConfig& cfg);

struct LossGradient {
  double value = 0.0;
  Eigen::MatrixXd d_pred;
  /// Eigenvalues k and k+1 of the truth are closer than 1e-8, so the
  /// subspace term was dropped for this sample.
  bool subspace_fallback = false;
};

/// loss_total and its gradient with respect to every entry of pred.
LossGradient loss_with_gradient(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                                const LossConfig& cfg);

}  // namespace eqhess
