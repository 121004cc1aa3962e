#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eqhess/potentials.hpp"
#include "eqhess/vibrational.hpp"

namespace eqhess {

enum class IrcDirection { forward, backward };
std::string to_string(IrcDirection d);

struct IrcConfig {
  /// Arc length per step in mass-weighted coordinates (sqrt(amu) A).
  double step_size = 0.05;
  int max_steps = 300;
  /// Stop once the RMS of the gradient falls below this. When unset, the
  /// loose preset's force threshold: converted to eV/A on molecular
  /// surfaces, taken as tabulated on abstract ones.
  std::optional<double> gradient_rms;
  /// Largest energy rise tolerated on an accepted step (eV).
  double energy_tolerance = 1e-6;
  int max_halvings = 5;
  /// Euler sub-steps on the local Taylor model per predictor step.
  int predictor_substeps = 10;

  void validate() const;
  double gradient_threshold(const Potential& potential) const;
};

struct IrcFrame {
  Eigen::VectorXd x;
  double energy;
  double arc_length;
};

struct IrcPath {
  IrcDirection direction = IrcDirection::forward;
  std::vector<IrcFrame> frames;
  bool converged = false;
  std::string message;
  std::optional<int> matched_minimum;

  const Eigen::VectorXd& terminal() const { return frames.back().x; }
};

struct IrcStarts {
  Eigen::VectorXd forward, backward;
  /// Unit transition vector in mass-weighted Cartesian coordinates.
  Eigen::VectorXd mode;
};

/// Displaces the saddle by +-`displacement` (sqrt(amu) A) along the single
/// negative mode of `proj`. The forward sign makes the mode's largest
/// component positive.
IrcStarts irc_init(const Eigen::VectorXd& saddle, const ProjectedHessian& proj,
                   const Eigen::VectorXd& coordinate_masses, double displacement = 0.05,
                   double neg_threshold = default_negative_threshold);

/// Steepest-descent path from `start` in mass-weighted coordinates.
/// `hessian_init` is the Cartesian Hessian used to seed the Taylor model.
IrcPath irc_run(const Potential& potential, const Eigen::VectorXd& start, const Eigen::MatrixXd& hessian_init,
                const IrcConfig& cfg = {}, IrcDirection direction = IrcDirection::forward);

/// Root-mean-square distance per point: atoms for molecular surfaces, single
/// coordinates otherwise.
double rmsd(const Potential& potential, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Index of the closest minimum within `tolerance`, if any.
std::optional<int> match_minimum(const Potential& potential, const Eigen::VectorXd& x,
                                 const std::vector<Eigen::VectorXd>& minima, double tolerance = 0.05);

struct IrcResult {
  IrcStarts starts;
  IrcPath forward, backward;
};

/// Both branches from a saddle, traced concurrently. Terminal points are
/// matched against `minima` when given.
IrcResult irc_both(const Potential& potential, const Eigen::VectorXd& saddle, const Eigen::MatrixXd& hessian,
                   const IrcConfig& cfg = {}, const std::vector<Eigen::VectorXd>& minima = {},
                   double displacement = 0.05);

}  // namespace eqhess
