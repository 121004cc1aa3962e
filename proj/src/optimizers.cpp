#include "eqhess/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "eqhess/error.hpp"
#include "eqhess/units.hpp"

namespace eqhess {

void ConvergenceCriteria::validate() const {
  for (const auto& v : {max_force, rms_force, max_step, rms_step})
    if (v) require(*v > 0.0 && std::isfinite(*v), "convergence thresholds must be positive");
}

ConvergenceCriteria CriteriaPreset::converted() const {
  constexpr double force = units::hartree_per_bohr_to_ev_per_angstrom;
  constexpr double length = units::bohr_angstrom;
  auto scale = [](std::optional<double> v, double f) { return v ? std::optional<double>(*v * f) : std::nullopt; };
  return {scale(max_force, force), scale(rms_force, force), scale(max_step, length), scale(rms_step, length)};
}

const std::vector<CriteriaPreset>& criteria_presets() {
  static const std::vector<CriteriaPreset> presets = {
      {"loose", 1.7e-3, 1.0e-2, 6.7e-3, std::nullopt},
      {"default", 4.5e-4, 3.0e-4, 1.8e-3, 1.2e-3},
      {"tight", 1.5e-5, 1.0e-5, 6.0e-5, 4.0e-5},
      {"very_tight", 1.0e-6, std::nullopt, 6.0e-6, 4.0e-6},
  };
  return presets;
}

ConvergenceCriteria criteria_preset(const std::string& name) {
  for (const auto& p : criteria_presets())
    if (name == p.name) return p.converted();
  throw InvalidInput("unknown criteria preset '" + name + "'");
}

namespace {

double rms(const Eigen::VectorXd& v) { return v.size() ? std::sqrt(v.squaredNorm() / v.size()) : 0.0; }
double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

CriteriaCheck check_criteria(const ConvergenceCriteria& c, const Eigen::VectorXd& forces,
                             const Eigen::VectorXd& step) {
  CriteriaCheck out;
  if (c.max_force) out.max_force = max_abs(forces) <= *c.max_force;
  if (c.rms_force) out.rms_force = rms(forces) <= *c.rms_force;
  if (c.max_step) out.max_step = max_abs(step) <= *c.max_step;
  if (c.rms_step) out.rms_step = rms(step) <= *c.rms_step;
  return out;
}

namespace {

struct ModeSplit {
  Eigen::VectorXd curvature;  // active eigenvalues
  Eigen::MatrixXd vectors;    // active eigenvectors
  Eigen::VectorXd grad;       // gradient in the active eigenbasis
};

ModeSplit split_modes(const Eigen::VectorXd& g, const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h + h.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("Hessian eigendecomposition failed");
  const Eigen::VectorXd full = eig.eigenvectors().transpose() * g;
  const double gnorm = g.norm();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < full.size(); ++i) {
    const bool rigid = std::abs(eig.eigenvalues()(i)) < 1e-6 && std::abs(full(i)) <= 1e-6 * gnorm;
    if (!rigid) keep.push_back(i);
  }
  ModeSplit m;
  const auto k = static_cast<Eigen::Index>(keep.size());
  m.curvature.resize(k);
  m.vectors.resize(h.rows(), k);
  m.grad.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    m.curvature(j) = eig.eigenvalues()(keep[static_cast<std::size_t>(j)]);
    m.vectors.col(j) = eig.eigenvectors().col(keep[static_cast<std::size_t>(j)]);
    m.grad(j) = full(keep[static_cast<std::size_t>(j)]);
  }
  return m;
}

// Lowest-eigenvalue RFO on the given modes with scaling alpha; returns the
// step in mode coordinates, or nullopt when the eigenvector has no
// component along the augmented direction.
std::optional<Eigen::VectorXd> rfo_min_part(const Eigen::VectorXd& b, const Eigen::VectorXd& f, double alpha) {
  const Eigen::Index m = b.size();
  if (m == 0) return Eigen::VectorXd();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(m + 1, m + 1);
  const double sa = std::sqrt(alpha);
  aug.diagonal().head(m) = b / alpha;
  aug.col(m).head(m) = f / sa;
  aug.row(m).head(m) = f.transpose() / sa;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(aug);
  const Eigen::VectorXd v = eig.eigenvectors().col(0);
  if (std::abs(v(m)) < 1e-12) return std::nullopt;
  return Eigen::VectorXd(v.head(m) / v(m) / sa);
}

// Uphill branch of the 2x2 augmented problem for a single mode.
double rfo_max_part(double b, double f, double alpha) {
  if (f == 0.0) return 0.0;
  const double shift = 0.5 * (b + std::sqrt(b * b + 4.0 * alpha * f * f));
  return -f / (b - shift);
}

class RfoSolver {
 public:
  RfoSolver(ModeSplit modes, RfoMode mode) : m_(std::move(modes)), mode_(mode) {}

  Eigen::VectorXd step(double alpha) const {
    const Eigen::Index k = m_.curvature.size();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    if (k == 0) return y;
    if (mode_ == RfoMode::min) {
      y = solve_min(m_.curvature, m_.grad, alpha);
    } else {
      y(0) = rfo_max_part(m_.curvature(0), m_.grad(0), alpha);
      y.tail(k - 1) = solve_min(m_.curvature.tail(k - 1), m_.grad.tail(k - 1), alpha);
    }
    return y;
  }

  bool newton_eligible() const {
    const Eigen::Index k = m_.curvature.size();
    if (k == 0) return true;
    if (mode_ == RfoMode::min) return m_.curvature(0) > 1e-8;
    return m_.curvature(0) < -1e-8 && (k == 1 || m_.curvature(1) > 1e-8);
  }

  Eigen::VectorXd newton() const { return -m_.grad.cwiseQuotient(m_.curvature); }

  Eigen::VectorXd to_cartesian(const Eigen::VectorXd& y) const { return m_.vectors * y; }

 private:
  static Eigen::VectorXd solve_min(const Eigen::VectorXd& b, const Eigen::VectorXd& f, double alpha) {
    if (auto y = rfo_min_part(b, f, alpha)) return *y;
    // Gradient orthogonal to the lowest mode: nudge it along that mode once.
    Eigen::VectorXd nudged = f;
    if (nudged.size()) nudged(0) += 1e-8 * std::max(f.norm(), 1e-12);
    if (auto y = rfo_min_part(b, nudged, alpha)) return *y;
    throw NumericalError("RFO eigenvector has no augmented component");
  }

  ModeSplit m_;
  RfoMode mode_;
};

}  // namespace

Eigen::VectorXd rfo_step(const Eigen::VectorXd& gradient, const Eigen::MatrixXd& hessian, RfoMode mode,
                         double trust_radius) {
  require(hessian.rows() == gradient.size() && hessian.cols() == gradient.size(), "RFO shape mismatch");
  require(gradient.allFinite() && hessian.allFinite(), "RFO inputs must be finite");
  require(trust_radius > 0.0, "trust radius must be positive");
  if (gradient.norm() == 0.0) return Eigen::VectorXd::Zero(gradient.size());

  const RfoSolver solver(split_modes(gradient, hessian), mode);
  auto length = [&](double alpha) { return solver.step(alpha).norm(); };

  Eigen::VectorXd y;
  if (solver.newton_eligible() && solver.newton().norm() <= trust_radius) {
    y = solver.newton();
  } else {
    double lo = solver.newton_eligible() ? 1e-6 : 1.0;
    double hi = 1e6;
    if (length(lo) <= trust_radius) {
      y = solver.step(lo);
    } else {
      for (int it = 0; it < 60 && hi / lo > 1.0 + 1e-10; ++it) {
        const double mid = std::sqrt(lo * hi);
        (length(mid) > trust_radius ? lo : hi) = mid;
      }
      y = solver.step(hi);
    }
  }
  Eigen::VectorXd s = solver.to_cartesian(y);
  const double norm = s.norm();
  if (norm > trust_radius) s *= trust_radius / norm;
  return s;
}

BfgsResult bfgs_update(const Eigen::MatrixXd& b, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                       double curvature_threshold) {
  const double ys = y.dot(s);
  const Eigen::VectorXd bs = b * s;
  const double sbs = s.dot(bs);
  if (!(ys > curvature_threshold * y.norm() * s.norm()) || std::abs(sbs) <= 1e-300) return {b, true};
  Eigen::MatrixXd out = b + y * y.transpose() / ys - bs * bs.transpose() / sbs;
  out = 0.5 * (out + out.transpose());
  return {out, false};
}

HessianSource HessianSource::parse(const std::string& text) {
  if (text == "oracle") return {HessianKind::oracle, BfgsInit::unit};
  if (text == "fd") return {HessianKind::finite_difference, BfgsInit::unit};
  if (text == "model") return {HessianKind::model, BfgsInit::unit};
  if (text == "bfgs:unit") return {HessianKind::bfgs, BfgsInit::unit};
  if (text == "bfgs:model") return {HessianKind::bfgs, BfgsInit::model};
  if (text == "bfgs:fd") return {HessianKind::bfgs, BfgsInit::finite_difference};
  if (text == "bfgs:oracle") return {HessianKind::bfgs, BfgsInit::oracle};
  throw InvalidInput("unknown Hessian source '" + text + "'");
}

std::string HessianSource::name() const {
  switch (kind) {
    case HessianKind::oracle: return "oracle";
    case HessianKind::finite_difference: return "fd";
    case HessianKind::model: return "model";
    case HessianKind::bfgs:
      switch (init) {
        case BfgsInit::unit: return "bfgs:unit";
        case BfgsInit::model: return "bfgs:model";
        case BfgsInit::finite_difference: return "bfgs:fd";
        case BfgsInit::oracle: return "bfgs:oracle";
      }
  }
  return "?";
}

bool HessianSource::needs_model() const {
  return kind == HessianKind::model || (kind == HessianKind::bfgs && init == BfgsInit::model);
}

HessianSetup resolve_hessian(const HessianSource& source, const Potential& potential, const HessianModel* model,
                             const ModelParams* params, double fd_step) {
  const Potential* pot = &potential;
  auto oracle = [pot](const Eigen::VectorXd& x) { return pot->hessian(x); };
  auto fd = [pot, fd_step](const Eigen::VectorXd& x) {
    return fd_hessian([pot](const Eigen::VectorXd& y) { return pot->evaluate(y, false).forces(); }, x, fd_step)
        .hessian;
  };
  auto learned = [&]() -> HessianFn {
    require(model != nullptr && params != nullptr, "model Hessians need a model and parameters");
    require(potential.atoms() != nullptr, "model Hessians need a molecular potential");
    const Molecule atoms = *potential.atoms();
    return [model, params, atoms](const Eigen::VectorXd& x) {
      return model->predict_hessian(atoms.with_coordinates(x), *params);
    };
  };
  const int n = potential.dimension();
  switch (source.kind) {
    case HessianKind::oracle: return {oracle, false};
    case HessianKind::finite_difference: return {fd, false};
    case HessianKind::model: return {learned(), false};
    case HessianKind::bfgs:
      switch (source.init) {
        case BfgsInit::unit:
          return {[n](const Eigen::VectorXd&) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)); }, true};
        case BfgsInit::model: return {learned(), true};
        case BfgsInit::finite_difference: return {fd, true};
        case BfgsInit::oracle: return {oracle, true};
      }
  }
  throw InvalidInput("unresolvable Hessian source");
}

Method parse_method(const std::string& name) {
  if (name == "sd" || name == "steepest_descent") return Method::steepest_descent;
  if (name == "fire") return Method::fire;
  if (name == "rfo") return Method::rfo;
  throw InvalidInput("unknown optimization method '" + name + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::steepest_descent: return "sd";
    case Method::fire: return "fire";
    case Method::rfo: return "rfo";
  }
  return "?";
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_steps: return "max_steps";
    case Termination::diverged: return "diverged";
    case Termination::non_finite: return "non_finite";
    case Termination::numerical_failure: return "numerical_failure";
  }
  return "?";
}

namespace {

class Run {
 public:
  Run(const Potential& p, const ConvergenceCriteria& c, OptResult& out) : potential_(p), criteria_(c), out_(out) {}

  // Evaluates and validates; returns false (and marks the result) on non-finite output.
  bool evaluate(const Eigen::VectorXd& x, Evaluation& ev) {
    ev = potential_.evaluate(x, false);
    if (!std::isfinite(ev.energy) || !ev.gradient.allFinite()) {
      out_.termination = Termination::non_finite;
      out_.message = fmt::format("non-finite energy or forces after {} steps", out_.steps);
      return false;
    }
    return true;
  }

  // Records the current point and reports whether it satisfies the criteria.
  bool record(const Eigen::VectorXd& x, const Evaluation& ev, const Eigen::VectorXd& last_step, double trust) {
    const Eigen::VectorXd f = ev.forces();
    out_.trajectory.push_back(x);
    out_.history.push_back({ev.energy, max_abs(f), rms(f), max_abs(last_step), rms(last_step), trust});
    out_.final_check = check_criteria(criteria_, f, last_step);
    if (out_.final_check.all()) {
      out_.converged = true;
      out_.termination = Termination::converged;
      return true;
    }
    return false;
  }

 private:
  const Potential& potential_;
  const ConvergenceCriteria& criteria_;
  OptResult& out_;
};

void run_steepest_descent(const Potential& p, Eigen::VectorXd x, const ConvergenceCriteria& c,
                          const OptConfig& cfg, OptResult& out) {
  Run run(p, c, out);
  Evaluation ev;
  if (!run.evaluate(x, ev)) return;
  Eigen::VectorXd last = Eigen::VectorXd::Zero(x.size());
  double scale = cfg.trust.initial;
  while (true) {
    if (run.record(x, ev, last, scale)) return;
    if (out.steps >= cfg.max_steps) return;
    ++out.steps;
    const Eigen::VectorXd dir = ev.forces();
    const double fnorm = dir.norm();
    double t = std::min(scale, cfg.trust.max) / fnorm;
    Evaluation trial;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      if (!run.evaluate(x + t * dir, trial)) return;
      if (trial.energy <= ev.energy - cfg.armijo * t * fnorm * fnorm) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.termination = Termination::numerical_failure;
      out.message = "line search found no descent";
      return;
    }
    last = t * dir;
    x += last;
    ev = trial;
    scale = std::min(2.0 * last.norm(), cfg.trust.max);
  }
}

void run_fire(const Potential& p, Eigen::VectorXd x, const ConvergenceCriteria& c, const OptConfig& cfg,
              OptResult& out) {
  constexpr int n_min = 5;
  constexpr double f_inc = 1.1, f_dec = 0.5, alpha_start = 0.1, f_alpha = 0.99;
  Run run(p, c, out);
  Evaluation ev;
  if (!run.evaluate(x, ev)) return;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd last = Eigen::VectorXd::Zero(x.size());
  double dt = cfg.fire_dt, alpha = alpha_start;
  int positive = 0;
  while (true) {
    if (run.record(x, ev, last, dt)) return;
    if (out.steps >= cfg.max_steps) return;
    ++out.steps;
    const Eigen::VectorXd f = ev.forces();
    const double power = f.dot(v);
    if (power > 0.0) {
      v = (1.0 - alpha) * v + alpha * v.norm() * f.normalized();
      if (++positive > n_min) {
        dt = std::min(dt * f_inc, cfg.fire_dt_max);
        alpha *= f_alpha;
      }
    } else {
      v.setZero();
      dt *= f_dec;
      alpha = alpha_start;
      positive = 0;
    }
    v += dt * f;
    Eigen::VectorXd step = dt * v;
    if (step.norm() > cfg.trust.max) step *= cfg.trust.max / step.norm();
    last = step;
    x += step;
    if (!run.evaluate(x, ev)) return;
  }
}

// Removes rigid translations and rotations of a molecular geometry from the
// Hessian so they carry exactly zero curvature.
Eigen::MatrixXd without_rigid_modes(const Potential& p, const Eigen::VectorXd& x, const Eigen::MatrixXd& h) {
  const Molecule* atoms = p.atoms();
  if (atoms == nullptr) return h;
  const Molecule geom = Molecule::make(atoms->atomic_numbers, atoms->with_coordinates(x).positions,
                                       Eigen::VectorXd::Ones(atoms->size()));
  const Eigen::MatrixXd r = eckart_basis(geom);
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(h.rows(), h.cols()) - r * r.transpose();
  const Eigen::MatrixXd out = proj * h * proj;
  return 0.5 * (out + out.transpose());
}

void run_rfo(const Potential& p, const Eigen::VectorXd& x0, const HessianSetup& hs, const ConvergenceCriteria& c,
             const OptConfig& cfg, OptResult& out) {
  require(static_cast<bool>(hs.evaluate), "rfo needs a Hessian source");
  Run run(p, c, out);
  Eigen::VectorXd x = x0;
  Evaluation ev;
  if (!run.evaluate(x, ev)) return;
  Eigen::VectorXd last = Eigen::VectorXd::Zero(x.size());
  double trust = std::clamp(cfg.trust.initial, cfg.trust.min, cfg.trust.max);
  Eigen::MatrixXd b;
  if (hs.quasi_newton) {
    b = hs.evaluate(x);
    ++out.hessian_evaluations;
  }
  bool rejected = false;
  while (true) {
    if (!rejected && run.record(x, ev, last, trust)) return;
    rejected = false;
    if (out.steps >= cfg.max_steps) return;
    if (cfg.mode == RfoMode::ts && (x - x0).norm() > cfg.divergence_radius) {
      out.termination = Termination::diverged;
      out.message = "left the divergence radius";
      return;
    }
    ++out.steps;
    if (!hs.quasi_newton) {
      b = hs.evaluate(x);
      ++out.hessian_evaluations;
    }
    if (!b.allFinite()) {
      out.termination = Termination::non_finite;
      out.message = "non-finite Hessian";
      return;
    }
    Eigen::VectorXd s;
    Eigen::MatrixXd model_h;
    try {
      model_h = without_rigid_modes(p, x, b);
      s = rfo_step(ev.gradient, model_h, cfg.mode, trust);
    } catch (const NumericalError& e) {
      out.termination = Termination::numerical_failure;
      out.message = e.what();
      return;
    }
    Evaluation next;
    if (!run.evaluate(x + s, next)) return;
    const double predicted = ev.gradient.dot(s) + 0.5 * s.dot(model_h * s);
    const double actual = next.energy - ev.energy;
    const double ratio = predicted != 0.0 ? actual / predicted : 1.0;
    bool good, poor;
    if (cfg.mode == RfoMode::min) {
      good = ratio > cfg.trust.good_ratio;
      poor = ratio < cfg.trust.poor_ratio;
    } else {
      good = std::abs(ratio - 1.0) < 1.0 - cfg.trust.good_ratio;
      poor = std::abs(ratio - 1.0) > 1.0 - cfg.trust.poor_ratio;
    }
    if (good) trust = std::min(trust * cfg.trust.grow, cfg.trust.max);
    if (poor) trust = std::max(trust * cfg.trust.shrink, cfg.trust.min);

    const double tolerance = 1e-12 * std::max(1.0, std::abs(ev.energy));
    if (cfg.mode == RfoMode::min && actual > tolerance && s.norm() > cfg.trust.min) {
      trust = std::max(std::min(trust, 0.5 * s.norm()), cfg.trust.min);
      if (hs.quasi_newton) {
        const BfgsResult upd = bfgs_update(b, s, next.gradient - ev.gradient);
        b = upd.hessian;
        out.bfgs_skipped += upd.skipped ? 1 : 0;
      }
      rejected = true;
      continue;
    }
    if (hs.quasi_newton) {
      const BfgsResult upd = bfgs_update(b, s, next.gradient - ev.gradient);
      b = upd.hessian;
      out.bfgs_skipped += upd.skipped ? 1 : 0;
    }
    x += s;
    last = s;
    ev = next;
  }
}

}  // namespace

OptResult optimize(const Potential& potential, const Eigen::VectorXd& x0, Method method,
                   const HessianSetup& hessian, const ConvergenceCriteria& criteria, const OptConfig& cfg) {
  require(x0.size() == potential.dimension(), "start geometry has the wrong dimension");
  require(x0.allFinite(), "start geometry must be finite");
  require(cfg.max_steps >= 0, "max_steps must be non-negative");
  require(cfg.trust.min > 0.0 && cfg.trust.min <= cfg.trust.max, "trust bounds must satisfy 0 < min <= max");
  criteria.validate();
  const auto start = std::chrono::steady_clock::now();
  OptResult out;
  switch (method) {
    case Method::steepest_descent: run_steepest_descent(potential, x0, criteria, cfg, out); break;
    case Method::fire: run_fire(potential, x0, criteria, cfg, out); break;
    case Method::rfo: run_rfo(potential, x0, hessian, criteria, cfg, out); break;
  }
  if (out.trajectory.empty()) out.trajectory.push_back(x0);
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

VibrationalReport oracle_report(const Potential& potential, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd h = potential.hessian(x);
  if (const Molecule* atoms = potential.atoms()) return analyze(atoms->with_coordinates(x), h);
  return analyze_surface(h, potential.coordinate_masses());
}

TsResult ts_refine(const Potential& potential, const Eigen::VectorXd& x0, const HessianSetup& hessian,
                   const ConvergenceCriteria& criteria, OptConfig cfg) {
  cfg.mode = RfoMode::ts;
  TsResult out;
  out.opt = optimize(potential, x0, Method::rfo, hessian, criteria, cfg);
  out.report = oracle_report(potential, out.opt.final_x());
  out.opt.classification = out.opt.converged ? out.report.classification : Classification::unconverged;
  out.success = out.opt.converged && out.report.classification == Classification::ts_order_1;
  return out;
}

}  // namespace eqhess
