#pragma once

#include <Eigen/Dense>
#include <string>

#include "eqhess/molecule.hpp"

namespace eqhess {

/// Mass-weighted Hessian restricted to the vibrational subspace.
struct ProjectedHessian {
  Eigen::MatrixXd matrix;  // (n - d) x (n - d), eV / (A^2 amu)
  Eigen::MatrixXd basis;   // (n - d) x n, orthonormal rows
  int removed = 0;         // d
};

enum class Classification { minimum, ts_order_1, ts_order_n, unconverged };

std::string to_string(Classification c);

struct VibrationalReport {
  Eigen::VectorXd eigenvalues;  // ascending, eV / (A^2 amu)
  /// Angular frequencies (1/s); imaginary modes are reported as negative.
  Eigen::VectorXd frequencies;
  int n_negative = 0;
  Classification classification = Classification::minimum;
  double zpe = 0.0;  // eV
};

inline constexpr double default_negative_threshold = 1e-4;

/// M^{-1/2} H M^{-1/2} with one mass per coordinate.
Eigen::MatrixXd mass_weight(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& coordinate_masses);

/// Orthonormal rigid-body vectors (3N x d) in mass-weighted coordinates:
/// three translations and the rotations about the principal axes whose
/// norm survives the linear-molecule threshold.
Eigen::MatrixXd eckart_basis(const Molecule& mol);

/// Projects onto the orthogonal complement of `rigid` (n x d). Passing an
/// n x 0 matrix keeps every coordinate.
ProjectedHessian eckart_project(const Eigen::MatrixXd& mass_weighted, const Eigen::MatrixXd& rigid);

/// (hbar / 2) sum of sqrt(lambda) over strictly positive eigenvalues.
double zpe(const ProjectedHessian& proj);

VibrationalReport classify(const ProjectedHessian& proj, double neg_threshold = default_negative_threshold);

/// Full pipeline for a molecule: mass weighting, Eckart projection, report.
VibrationalReport analyze(const Molecule& mol, const Eigen::MatrixXd& hessian,
                          double neg_threshold = default_negative_threshold);

/// Abstract surfaces: mass weighting only, no rigid-body removal.
VibrationalReport analyze_surface(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& masses,
                                  double neg_threshold = default_negative_threshold);

/// Wavenumbers (cm^-1) of the reported angular frequencies, sign preserved.
Eigen::VectorXd frequencies_invcm(const VibrationalReport& report);

}  // namespace eqhess
