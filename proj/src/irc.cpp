#include "eqhess/irc.hpp"

#include <cmath>
#include <fmt/format.h>
#include <future>

#include "eqhess/error.hpp"
#include "eqhess/optimizers.hpp"

namespace eqhess {

std::string to_string(IrcDirection d) { return d == IrcDirection::forward ? "forward" : "backward"; }

double IrcConfig::gradient_threshold(const Potential& potential) const {
  if (gradient_rms) return *gradient_rms;
  for (const auto& preset : criteria_presets())
    if (std::string(preset.name) == "loose")
      return potential.atoms() ? *preset.converted().max_force : *preset.max_force;
  throw InvalidInput("loose criteria preset missing");
}

void IrcConfig::validate() const {
  require(std::isfinite(step_size) && step_size > 0.0, "IRC step size must be positive");
  require(max_steps >= 0, "IRC max_steps must be non-negative");
  require(!gradient_rms || (std::isfinite(*gradient_rms) && *gradient_rms > 0.0),
          "IRC gradient threshold must be positive");
  require(energy_tolerance >= 0.0, "IRC energy tolerance must be non-negative");
  require(max_halvings >= 0, "IRC max_halvings must be non-negative");
  require(predictor_substeps >= 1, "IRC needs at least one predictor sub-step");
}

IrcStarts irc_init(const Eigen::VectorXd& saddle, const ProjectedHessian& proj,
                   const Eigen::VectorXd& coordinate_masses, double displacement, double neg_threshold) {
  require(saddle.size() == coordinate_masses.size(), "saddle and masses differ in length");
  require(proj.basis.cols() == saddle.size(), "projected Hessian does not match the saddle");
  require(std::isfinite(displacement) && displacement >= 0.0, "IRC displacement must be non-negative");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(proj.matrix);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition at the saddle failed");
  int negative = 0;
  for (double lam : eig.eigenvalues()) negative += lam < -neg_threshold ? 1 : 0;
  if (negative != 1)
    throw InvalidInput(fmt::format("IRC needs exactly one negative mode at the saddle, found {}", negative));

  IrcStarts out;
  out.mode = proj.basis.transpose() * eig.eigenvectors().col(0);
  out.mode.normalize();
  Eigen::Index largest = 0;
  out.mode.cwiseAbs().maxCoeff(&largest);
  if (out.mode(largest) < 0.0) out.mode = -out.mode;
  const Eigen::VectorXd shift = displacement * out.mode.cwiseQuotient(coordinate_masses.cwiseSqrt());
  out.forward = saddle + shift;
  out.backward = saddle - shift;
  return out;
}

namespace {

double rms(const Eigen::VectorXd& v) { return v.size() ? v.norm() / std::sqrt(double(v.size())) : 0.0; }

// Euler sub-steps down the quadratic model g(dq) = g0 + H dq. Stops at the
// model minimum along the current direction or when the model gradient
// turns against the starting one.
Eigen::VectorXd taylor_predictor(const Eigen::VectorXd& g0, const Eigen::MatrixXd& h, double length, int substeps) {
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(g0.size());
  const double sub = length / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Eigen::VectorXd g = g0 + h * dq;
    const double norm = g.norm();
    if (norm < 1e-300 || g.dot(g0) <= 0.0) break;
    const Eigen::VectorXd d = -g / norm;
    const double curvature = d.dot(h * d);
    if (curvature > 0.0 && norm / curvature < sub) {
      dq += (norm / curvature) * d;
      break;
    }
    dq += sub * d;
  }
  return dq;
}

}  // namespace

IrcPath irc_run(const Potential& p, const Eigen::VectorXd& start, const Eigen::MatrixXd& hessian_init,
                const IrcConfig& cfg, IrcDirection direction) {
  cfg.validate();
  const Eigen::Index n = p.dimension();
  require(start.size() == n, "IRC start has the wrong dimension");
  require(start.allFinite(), "IRC start must be finite");
  require(hessian_init.rows() == n && hessian_init.cols() == n, "IRC Hessian has the wrong shape");

  const Eigen::VectorXd sqrt_m = p.coordinate_masses().cwiseSqrt();
  const Eigen::VectorXd inv_sqrt_m = sqrt_m.cwiseInverse();
  Eigen::MatrixXd h = mass_weight(hessian_init, p.coordinate_masses());
  const double threshold = cfg.gradient_threshold(p);

  IrcPath path;
  path.direction = direction;
  Eigen::VectorXd x = start;
  Evaluation ev = p.evaluate(x, false);
  if (!std::isfinite(ev.energy) || !ev.gradient.allFinite()) {
    path.frames.push_back({x, ev.energy, 0.0});
    path.message = "non-finite energy at the start";
    return path;
  }
  double arc = 0.0;
  path.frames.push_back({x, ev.energy, arc});

  double step = cfg.step_size;
  for (int it = 0; it < cfg.max_steps; ++it) {
    if (rms(ev.gradient) < threshold) {
      path.converged = true;
      path.message = "gradient below threshold";
      return path;
    }
    const Eigen::VectorXd g0 = ev.gradient.cwiseProduct(inv_sqrt_m);
    bool accepted = false;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving) {
      Eigen::VectorXd dq = taylor_predictor(g0, h, step, cfg.predictor_substeps);
      if (dq.norm() < 1e-14 * step) dq = -step * g0.normalized();
      const Eigen::VectorXd x_pred = x + dq.cwiseProduct(inv_sqrt_m);
      Evaluation pred = p.evaluate(x_pred, false);
      if (!std::isfinite(pred.energy) || !pred.gradient.allFinite() ||
          pred.energy > ev.energy + cfg.energy_tolerance) {
        step *= 0.5;
        continue;
      }
      Eigen::VectorXd x_next = x_pred;
      Evaluation next = std::move(pred);

      // Corrector: the same arc length along the mean of the unit
      // anti-gradients at both ends, kept only if it ends lower.
      const Eigen::VectorXd g_pred = next.gradient.cwiseProduct(inv_sqrt_m);
      if (g_pred.norm() > 0.0) {
        const Eigen::VectorXd tangent = -(g0.normalized() + g_pred.normalized());
        if (tangent.norm() > 1e-12) {
          const Eigen::VectorXd x_corr = x + (dq.norm() * tangent.normalized()).cwiseProduct(inv_sqrt_m);
          Evaluation corr = p.evaluate(x_corr, false);
          if (std::isfinite(corr.energy) && corr.gradient.allFinite() && corr.energy < next.energy) {
            x_next = x_corr;
            next = std::move(corr);
          }
        }
      }

      const Eigen::VectorXd s = (x_next - x).cwiseProduct(sqrt_m);
      const Eigen::VectorXd y = next.gradient.cwiseProduct(inv_sqrt_m) - g0;
      h = bfgs_update(h, s, y).hessian;
      arc += s.norm();
      x = x_next;
      ev = std::move(next);
      path.frames.push_back({x, ev.energy, arc});
      step = std::min(2.0 * step, cfg.step_size);
      accepted = true;
      break;
    }
    if (!accepted) {
      path.message = fmt::format("energy kept rising after {} step halvings", cfg.max_halvings);
      return path;
    }
  }
  if (rms(ev.gradient) < threshold) {
    path.converged = true;
    path.message = "gradient below threshold";
  } else {
    path.message = "reached max_steps";
  }
  return path;
}

double rmsd(const Potential& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size() && a.size() == p.dimension(), "RMSD needs two geometries of the potential's size");
  const double points = p.atoms() ? double(p.atoms()->size()) : double(a.size());
  return std::sqrt((a - b).squaredNorm() / points);
}

std::optional<int> match_minimum(const Potential& p, const Eigen::VectorXd& x,
                                 const std::vector<Eigen::VectorXd>& minima, double tolerance) {
  std::optional<int> best;
  double best_d = tolerance;
  for (std::size_t i = 0; i < minima.size(); ++i) {
    const double d = rmsd(p, x, minima[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

IrcResult irc_both(const Potential& p, const Eigen::VectorXd& saddle, const Eigen::MatrixXd& hessian,
                   const IrcConfig& cfg, const std::vector<Eigen::VectorXd>& minima, double displacement) {
  const Eigen::VectorXd masses = p.coordinate_masses();
  const Eigen::MatrixXd mw = mass_weight(hessian, masses);
  Eigen::MatrixXd rigid(saddle.size(), 0);
  if (const Molecule* atoms = p.atoms()) rigid = eckart_basis(atoms->with_coordinates(saddle));

  IrcResult out;
  out.starts = irc_init(saddle, eckart_project(mw, rigid), masses, displacement);
  auto backward = std::async(std::launch::async, [&] {
    return irc_run(p, out.starts.backward, hessian, cfg, IrcDirection::backward);
  });
  out.forward = irc_run(p, out.starts.forward, hessian, cfg, IrcDirection::forward);
  out.backward = backward.get();
  if (!minima.empty()) {
    out.forward.matched_minimum = match_minimum(p, out.forward.terminal(), minima);
    out.backward.matched_minimum = match_minimum(p, out.backward.terminal(), minima);
  }
  return out;
}

}  // namespace eqhess
