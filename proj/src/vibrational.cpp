#include "eqhess/vibrational.hpp"

#include <cmath>
#include <fmt/format.h>

#include "eqhess/error.hpp"
#include "eqhess/units.hpp"

namespace eqhess {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::minimum: return "minimum";
    case Classification::ts_order_1: return "ts_order_1";
    case Classification::ts_order_n: return "ts_order_n";
    case Classification::unconverged: return "unconverged";
  }
  return "?";
}

Eigen::MatrixXd mass_weight(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& coordinate_masses) {
  require(hessian.rows() == hessian.cols() && hessian.rows() == coordinate_masses.size(),
          "mass weighting needs one mass per Hessian row");
  require((coordinate_masses.array() > 0.0).all(), "masses must be positive");
  const Eigen::VectorXd inv_sqrt = coordinate_masses.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd mw = inv_sqrt.asDiagonal() * hessian * inv_sqrt.asDiagonal();
  return 0.5 * (mw + mw.transpose());
}

Eigen::MatrixXd eckart_basis(const Molecule& mol) {
  validate(mol);
  const int n = mol.size();
  const double total_mass = mol.masses.sum();
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) com += mol.masses(i) * mol.positions.row(i).transpose();
  com /= total_mass;
  Positions centred = mol.positions.rowwise() - com.transpose();

  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d r = centred.row(i).transpose();
    inertia += mol.masses(i) * (r.squaredNorm() * Eigen::Matrix3d::Identity() - r * r.transpose());
  }
  const Eigen::Matrix3d axes = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(inertia).eigenvectors();

  Eigen::MatrixXd vectors(3 * n, 6);
  int count = 0;
  for (int a = 0; a < 3; ++a) {
    vectors.col(count).setZero();
    for (int i = 0; i < n; ++i) vectors(3 * i + a, count) = std::sqrt(mol.masses(i));
    ++count;
  }
  const double extent = (centred.colwise().maxCoeff() - centred.colwise().minCoeff()).maxCoeff();
  const double threshold = 1e-8 * std::sqrt(total_mass) * extent;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd rot(3 * n);
    const Eigen::Vector3d axis = axes.col(k);
    for (int i = 0; i < n; ++i)
      rot.segment<3>(3 * i) = std::sqrt(mol.masses(i)) * axis.cross(Eigen::Vector3d(centred.row(i).transpose()));
    if (rot.norm() > threshold && extent > 0.0) vectors.col(count++) = rot;
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(vectors.leftCols(count));
  return qr.householderQ() * Eigen::MatrixXd::Identity(3 * n, count);
}

ProjectedHessian eckart_project(const Eigen::MatrixXd& mass_weighted, const Eigen::MatrixXd& rigid) {
  const Eigen::Index n = mass_weighted.rows();
  require(mass_weighted.cols() == n, "projection needs a square matrix");
  require(rigid.rows() == n, "rigid-body vectors have the wrong length");
  ProjectedHessian out;
  out.removed = static_cast<int>(rigid.cols());
  if (rigid.cols() == 0) {
    out.basis = Eigen::MatrixXd::Identity(n, n);
  } else {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rigid.transpose(), Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-10 * s(0) ? 1 : 0;
    if (rank != rigid.cols())
      throw NumericalError(fmt::format("rigid-body vectors have rank {}, expected {}", rank, rigid.cols()));
    out.basis = svd.matrixV().rightCols(n - rank).transpose();
  }
  const Eigen::MatrixXd p = out.basis * mass_weighted * out.basis.transpose();
  out.matrix = 0.5 * (p + p.transpose());
  return out;
}

namespace {

Eigen::VectorXd eigenvalues_of(const ProjectedHessian& proj) {
  if (proj.matrix.size() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(proj.matrix, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of projected Hessian failed");
  return eig.eigenvalues();
}

double zpe_from(const Eigen::VectorXd& eigenvalues) {
  double sum = 0.0;
  for (double lam : eigenvalues)
    if (lam > 0.0) sum += std::sqrt(lam * units::mw_hessian_to_s2);
  return 0.5 * units::hbar_evs * sum;
}

}  // namespace

double zpe(const ProjectedHessian& proj) { return zpe_from(eigenvalues_of(proj)); }

VibrationalReport classify(const ProjectedHessian& proj, double neg_threshold) {
  require(neg_threshold >= 0.0, "negative-eigenvalue threshold must be non-negative");
  VibrationalReport r;
  r.eigenvalues = eigenvalues_of(proj);
  r.frequencies.resize(r.eigenvalues.size());
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    const double lam = r.eigenvalues(i);
    const double w = std::sqrt(std::abs(lam) * units::mw_hessian_to_s2);
    r.frequencies(i) = lam < 0.0 ? -w : w;
    if (lam < -neg_threshold) ++r.n_negative;
  }
  r.classification = r.n_negative == 0   ? Classification::minimum
                     : r.n_negative == 1 ? Classification::ts_order_1
                                         : Classification::ts_order_n;
  r.zpe = zpe_from(r.eigenvalues);
  return r;
}

VibrationalReport analyze(const Molecule& mol, const Eigen::MatrixXd& hessian, double neg_threshold) {
  return classify(eckart_project(mass_weight(hessian, mol.coordinate_masses()), eckart_basis(mol)), neg_threshold);
}

VibrationalReport analyze_surface(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& masses,
                                  double neg_threshold) {
  return classify(eckart_project(mass_weight(hessian, masses), Eigen::MatrixXd(hessian.rows(), 0)), neg_threshold);
}

Eigen::VectorXd frequencies_invcm(const VibrationalReport& report) {
  return report.frequencies * units::angular_to_invcm;
}

}  // namespace eqhess
