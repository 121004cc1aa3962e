#pragma once

#include <Eigen/Dense>

#include "eqhess/molecule.hpp"

namespace eqhess {

/// One labelled geometry: energy (eV), forces (eV/Angstrom) and the
/// 3N x 3N Hessian (eV/Angstrom^2).
struct Sample {
  Molecule molecule;
  double energy = 0.0;
  Positions forces;
  Eigen::MatrixXd hessian;
};

/// Throws InvalidInput on inconsistent shapes or a Hessian that is not
/// symmetric to 1e-8.
void validate(const Sample& sample);

}  // namespace eqhess
