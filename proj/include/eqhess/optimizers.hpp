#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eqhess/model.hpp"
#include "eqhess/potentials.hpp"
#include "eqhess/vibrational.hpp"

namespace eqhess {

/// Thresholds on the current forces (eV/A) and on the last step taken (A).
/// A missing entry is not checked.
struct ConvergenceCriteria {
  std::optional<double> max_force, rms_force, max_step, rms_step;

  void validate() const;
};

/// A preset as tabulated in atomic units: forces in Hartree/Bohr, steps in Bohr.
struct CriteriaPreset {
  const char* name;
  std::optional<double> max_force, rms_force, max_step, rms_step;

  ConvergenceCriteria converted() const;
};

const std::vector<CriteriaPreset>& criteria_presets();
/// "loose", "default", "tight" or "very_tight", converted to eV/A and A.
ConvergenceCriteria criteria_preset(const std::string& name);

struct CriteriaCheck {
  bool max_force = true, rms_force = true, max_step = true, rms_step = true;
  bool all() const { return max_force && rms_force && max_step && rms_step; }
};

CriteriaCheck check_criteria(const ConvergenceCriteria& c, const Eigen::VectorXd& forces,
                             const Eigen::VectorXd& step);

enum class RfoMode { min, ts };

/// Trust-region rational-function step. `ts` maximises along the lowest
/// Hessian mode and minimises in its complement. Near-zero curvature modes
/// carrying no gradient (rigid-body motion) are left out of the step.
Eigen::VectorXd rfo_step(const Eigen::VectorXd& gradient, const Eigen::MatrixXd& hessian, RfoMode mode,
                         double trust_radius);

struct BfgsResult {
  Eigen::MatrixXd hessian;
  bool skipped = false;
};

/// Two-term BFGS update of a Hessian approximation from step s and gradient
/// change y. Skipped when y.s <= threshold * |y| |s|.
BfgsResult bfgs_update(const Eigen::MatrixXd& b, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                       double curvature_threshold = 1e-10);

using HessianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

enum class HessianKind { oracle, finite_difference, model, bfgs };
enum class BfgsInit { unit, model, finite_difference, oracle };

struct HessianSource {
  HessianKind kind = HessianKind::oracle;
  BfgsInit init = BfgsInit::unit;

  /// Accepts oracle, fd, model, bfgs:unit, bfgs:model, bfgs:fd, bfgs:oracle.
  static HessianSource parse(const std::string& text);
  std::string name() const;
  bool needs_model() const;
};

/// Hessian provider plus whether it seeds a quasi-Newton approximation
/// instead of being evaluated every step.
struct HessianSetup {
  HessianFn evaluate;
  bool quasi_newton = false;
};

/// The model-backed kinds need `model` and `params`; the potential must
/// describe a molecule for them.
HessianSetup resolve_hessian(const HessianSource& source, const Potential& potential,
                             const HessianModel* model = nullptr, const ModelParams* params = nullptr,
                             double fd_step = 1e-3);

enum class Method { steepest_descent, fire, rfo };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct TrustConfig {
  double initial = 0.1;
  double min = 1e-4;
  double max = 0.3;
  double grow = 1.2;
  double shrink = 0.5;
  double good_ratio = 0.75;
  double poor_ratio = 0.25;
};

struct OptConfig {
  int max_steps = 150;
  TrustConfig trust;
  RfoMode mode = RfoMode::min;
  /// ts mode: distance from the start beyond which the run stops as diverged.
  double divergence_radius = 0.5;
  double armijo = 1e-4;
  double fire_dt = 0.1;
  double fire_dt_max = 1.0;
};

struct StepRecord {
  double energy;
  double max_force, rms_force, max_step, rms_step;
  double trust;
};

enum class Termination { converged, max_steps, diverged, non_finite, numerical_failure };
std::string to_string(Termination t);

struct OptResult {
  std::vector<Eigen::VectorXd> trajectory;
  std::vector<StepRecord> history;
  bool converged = false;
  int steps = 0;
  double wall_ms = 0.0;
  Termination termination = Termination::max_steps;
  std::string message;
  CriteriaCheck final_check;
  int bfgs_skipped = 0;
  int hessian_evaluations = 0;
  std::optional<Classification> classification;

  const Eigen::VectorXd& final_x() const { return trajectory.back(); }
};

/// Local minimisation (or saddle refinement for rfo in ts mode). Energies and
/// forces come from `potential`; `hessian` is required for rfo only.
OptResult optimize(const Potential& potential, const Eigen::VectorXd& x0, Method method,
                   const HessianSetup& hessian, const ConvergenceCriteria& criteria, const OptConfig& cfg = {});

struct TsResult {
  OptResult opt;
  VibrationalReport report;
  bool success = false;  // converged and exactly one negative mode
};

/// Partitioned-RFO saddle refinement followed by frequency analysis on the
/// oracle Hessian of `potential`.
TsResult ts_refine(const Potential& potential, const Eigen::VectorXd& x0, const HessianSetup& hessian,
                   const ConvergenceCriteria& criteria, OptConfig cfg = {});

/// Vibrational report at x using the potential's own Hessian: Eckart
/// projection for molecules, plain mass weighting for abstract surfaces.
VibrationalReport oracle_report(const Potential& potential, const Eigen::VectorXd& x);

}  // namespace eqhess
