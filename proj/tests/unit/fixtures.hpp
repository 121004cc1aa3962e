#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "eqhess/irreps.hpp"
#include "eqhess/model.hpp"
#include "eqhess/molecule.hpp"

// Molecules and configurations reused across test files.
namespace eqhess::testutil {

inline Molecule random_cluster(int n, std::mt19937_64& rng, double box = 4.0, double min_dist = 0.9) {
  std::uniform_real_distribution<double> u(-box / 2, box / 2);
  std::uniform_int_distribution<int> species(1, 8);
  Positions pos(n, 3);
  for (int i = 0; i < n; ++i) {
    for (;;) {
      pos.row(i) = Eigen::RowVector3d(u(rng), u(rng), u(rng));
      bool ok = true;
      for (int j = 0; j < i; ++j) ok = ok && (pos.row(i) - pos.row(j)).norm() > min_dist;
      if (ok) break;
    }
  }
  std::vector<int> z(static_cast<std::size_t>(n));
  for (auto& x : z) x = species(rng);
  return Molecule::make(z, pos);
}

inline Molecule rotated(const Molecule& mol, const Rotation& r, const Eigen::Vector3d& shift = Eigen::Vector3d::Zero()) {
  Molecule out = mol;
  for (int i = 0; i < mol.size(); ++i)
    out.positions.row(i) = (r.matrix() * mol.positions.row(i).transpose() + shift).transpose();
  return out;
}

inline Eigen::MatrixXd block_rotation(int n, const Rotation& r) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int i = 0; i < n; ++i) q.block<3, 3>(3 * i, 3 * i) = r.matrix();
  return q;
}

inline ModelConfig small_config() {
  ModelConfig cfg;
  cfg.channels = 4;
  cfg.radial_basis = 8;
  cfg.radial_hidden = 8;
  return cfg;
}

}  // namespace eqhess::testutil
