#include "eqhess/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <random>

#include "eqhess/error.hpp"

namespace eqhess {

namespace {

class PairPotential final : public Potential {
 public:
  PairPotential(PotentialSpec spec, Molecule atoms) : spec_(std::move(spec)), atoms_(std::move(atoms)) {}

  int dimension() const override { return 3 * atoms_.size(); }
  Eigen::VectorXd coordinate_masses() const override { return atoms_.coordinate_masses(); }
  const Molecule* atoms() const override { return &atoms_; }

  Evaluation evaluate(const Eigen::VectorXd& x, bool with_hessian) const override {
    require(x.size() == dimension(), "coordinate vector has wrong length");
    const int n = atoms_.size();
    Evaluation out;
    out.gradient = Eigen::VectorXd::Zero(x.size());
    if (with_hessian) out.hessian = Eigen::MatrixXd::Zero(x.size(), x.size());
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Eigen::Vector3d r = x.segment<3>(3 * j) - x.segment<3>(3 * i);
        const double d = r.norm();
        if (!(d > 0.0)) throw InvalidInput(fmt::format("atoms {} and {} coincide", i, j));
        const PairTerm t = pair_term(spec_, d);
        const Eigen::Vector3d u = r / d;
        out.energy += t.energy;
        out.gradient.segment<3>(3 * j) += t.first * u;
        out.gradient.segment<3>(3 * i) -= t.first * u;
        if (with_hessian) {
          const Eigen::Matrix3d uu = u * u.transpose();
          const Eigen::Matrix3d k = t.second * uu + (t.first / d) * (Eigen::Matrix3d::Identity() - uu);
          auto& h = *out.hessian;
          h.block<3, 3>(3 * i, 3 * i) += k;
          h.block<3, 3>(3 * j, 3 * j) += k;
          h.block<3, 3>(3 * i, 3 * j) -= k;
          h.block<3, 3>(3 * j, 3 * i) -= k;
        }
      }
    }
    return out;
  }

 private:
  PotentialSpec spec_;
  Molecule atoms_;
};

class Surface final : public Potential {
 public:
  explicit Surface(PotentialSpec spec) : spec_(std::move(spec)) {
    coeffs_ = spec_.coefficients;
    if (coeffs_.empty()) coeffs_.assign(static_cast<std::size_t>(spec_.dimension), 1.0);
  }

  int dimension() const override { return spec_.dimension; }
  Eigen::VectorXd coordinate_masses() const override { return Eigen::VectorXd::Ones(spec_.dimension); }

  Evaluation evaluate(const Eigen::VectorXd& x, bool with_hessian) const override {
    require(x.size() == dimension(), "coordinate vector has wrong length");
    const int n = dimension();
    Evaluation out;
    out.gradient = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    switch (spec_.surface) {
      case SurfaceKind::quadratic_bowl:
        for (int i = 0; i < n; ++i) {
          const double c = coeffs_[static_cast<std::size_t>(i)];
          out.energy += 0.5 * c * x(i) * x(i);
          out.gradient(i) = c * x(i);
          h(i, i) = c;
        }
        break;
      case SurfaceKind::double_well: {
        const double hw = spec_.well_height, k = spec_.stiffness, c = spec_.coupling;
        const double x0 = x(0);
        const double w = x0 * x0 - 1.0;
        out.energy = hw * w * w;
        out.gradient(0) = 4.0 * hw * w * x0;
        h(0, 0) = hw * (12.0 * x0 * x0 - 4.0);
        for (int i = 1; i < n; ++i) {
          const double dev = x(i) - c * x0 * x0;
          out.energy += 0.5 * k * dev * dev;
          out.gradient(i) += k * dev;
          out.gradient(0) += -2.0 * c * x0 * k * dev;
          h(i, i) += k;
          h(0, i) += -2.0 * c * x0 * k;
          h(i, 0) += -2.0 * c * x0 * k;
          h(0, 0) += k * (4.0 * c * c * x0 * x0 - 2.0 * c * dev);
        }
        break;
      }
      case SurfaceKind::multi_well:
        for (int i = 0; i < n; ++i) {
          const double a = coeffs_[static_cast<std::size_t>(i)];
          const double w = x(i) * x(i) - 1.0;
          out.energy += a * w * w;
          out.gradient(i) = 4.0 * a * w * x(i);
          h(i, i) = a * (12.0 * x(i) * x(i) - 4.0);
        }
        break;
      case SurfaceKind::muller_brown: {
        static constexpr double A[4] = {-200.0, -100.0, -170.0, 15.0};
        static constexpr double a[4] = {-1.0, -1.0, -6.5, 0.7};
        static constexpr double b[4] = {0.0, 0.0, 11.0, 0.6};
        static constexpr double c[4] = {-10.0, -10.0, -6.5, 0.7};
        static constexpr double X[4] = {1.0, 0.0, -0.5, -1.0};
        static constexpr double Y[4] = {0.0, 0.5, 1.5, 1.0};
        for (int t = 0; t < 4; ++t) {
          const double dx = x(0) - X[t], dy = x(1) - Y[t];
          const double e = spec_.energy_scale * A[t] * std::exp(a[t] * dx * dx + b[t] * dx * dy + c[t] * dy * dy);
          const double px = 2.0 * a[t] * dx + b[t] * dy;
          const double py = b[t] * dx + 2.0 * c[t] * dy;
          out.energy += e;
          out.gradient(0) += e * px;
          out.gradient(1) += e * py;
          h(0, 0) += e * (px * px + 2.0 * a[t]);
          h(1, 1) += e * (py * py + 2.0 * c[t]);
          h(0, 1) += e * (px * py + b[t]);
        }
        h(1, 0) = h(0, 1);
        break;
      }
    }
    if (with_hessian) out.hessian = std::move(h);
    return out;
  }

 private:
  PotentialSpec spec_;
  std::vector<double> coeffs_;
};

}  // namespace

void PotentialSpec::validate() const {
  switch (kind) {
    case PotentialKind::harmonic_bond:
      require(k > 0.0 && r0 > 0.0, "harmonic_bond needs k > 0 and r0 > 0");
      break;
    case PotentialKind::morse:
      require(de > 0.0 && a > 0.0 && r0 > 0.0, "morse needs de, a, r0 > 0");
      break;
    case PotentialKind::lennard_jones:
      require(epsilon > 0.0 && sigma > 0.0, "lennard_jones needs epsilon, sigma > 0");
      break;
    case PotentialKind::generic_nd:
      require(dimension >= 1, "generic_nd needs a positive dimension");
      require(coefficients.empty() || coefficients.size() == static_cast<std::size_t>(dimension),
              "coefficients must match the dimension");
      for (double c : coefficients) require(c > 0.0, "surface coefficients must be positive");
      if (surface == SurfaceKind::double_well) {
        require(well_height > 0.0 && stiffness > 0.0, "double_well needs positive height and stiffness");
      }
      if (surface == SurfaceKind::muller_brown) require(dimension == 2, "muller_brown is two-dimensional");
      break;
  }
}

PotentialKind parse_potential_kind(const std::string& name) {
  if (name == "harmonic_bond") return PotentialKind::harmonic_bond;
  if (name == "morse") return PotentialKind::morse;
  if (name == "lennard_jones") return PotentialKind::lennard_jones;
  if (name == "generic_nd") return PotentialKind::generic_nd;
  throw InvalidInput("unknown potential kind '" + name + "'");
}

SurfaceKind parse_surface_kind(const std::string& name) {
  if (name == "quadratic_bowl") return SurfaceKind::quadratic_bowl;
  if (name == "double_well") return SurfaceKind::double_well;
  if (name == "multi_well") return SurfaceKind::multi_well;
  if (name == "muller_brown") return SurfaceKind::muller_brown;
  throw InvalidInput("unknown surface kind '" + name + "'");
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::harmonic_bond: return "harmonic_bond";
    case PotentialKind::morse: return "morse";
    case PotentialKind::lennard_jones: return "lennard_jones";
    case PotentialKind::generic_nd: return "generic_nd";
  }
  return "?";
}

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::quadratic_bowl: return "quadratic_bowl";
    case SurfaceKind::double_well: return "double_well";
    case SurfaceKind::multi_well: return "multi_well";
    case SurfaceKind::muller_brown: return "muller_brown";
  }
  return "?";
}

PairTerm pair_term(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialKind::harmonic_bond: {
      const double dr = r - spec.r0;
      return {0.5 * spec.k * dr * dr, spec.k * dr, spec.k};
    }
    case PotentialKind::morse: {
      const double e = std::exp(-spec.a * (r - spec.r0));
      const double one_minus = 1.0 - e;
      return {spec.de * one_minus * one_minus, 2.0 * spec.de * spec.a * e * one_minus,
              2.0 * spec.de * spec.a * spec.a * e * (2.0 * e - 1.0)};
    }
    case PotentialKind::lennard_jones: {
      const double s6 = std::pow(spec.sigma / r, 6);
      const double s12 = s6 * s6;
      const double e4 = 4.0 * spec.epsilon;
      return {e4 * (s12 - s6), e4 * (-12.0 * s12 + 6.0 * s6) / r, e4 * (156.0 * s12 - 42.0 * s6) / (r * r)};
    }
    case PotentialKind::generic_nd:
      break;
  }
  throw InvalidInput("pair_term needs a pairwise potential kind");
}

std::unique_ptr<Potential> make_potential(const PotentialSpec& spec, const Molecule* atoms) {
  spec.validate();
  if (spec.kind == PotentialKind::generic_nd) return std::make_unique<Surface>(spec);
  require(atoms != nullptr, "pairwise potentials need an atom list");
  validate(*atoms);
  return std::make_unique<PairPotential>(spec, *atoms);
}

std::vector<StationaryPoint> known_stationary_points(const PotentialSpec& spec) {
  spec.validate();
  require(spec.kind == PotentialKind::generic_nd, "stationary points are only tabulated for generic_nd");
  const int n = spec.dimension;
  std::vector<StationaryPoint> out;
  if (spec.surface == SurfaceKind::double_well) {
    out.push_back({Eigen::VectorXd::Zero(n), 1});
    for (double s : {-1.0, 1.0}) {
      Eigen::VectorXd x = Eigen::VectorXd::Constant(n, spec.coupling);
      x(0) = s;
      out.push_back({x, 0});
    }
  } else if (spec.surface == SurfaceKind::multi_well) {
    require(n <= 10, "multi_well enumeration limited to 10 dimensions");
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      Eigen::VectorXd x(n);
      int order = 0;
      for (int i = 0, c = code; i < n; ++i, c /= 3) {
        x(i) = static_cast<double>(c % 3 - 1);
        order += (c % 3 == 1) ? 1 : 0;
      }
      out.push_back({x, order});
    }
  } else if (spec.surface == SurfaceKind::quadratic_bowl) {
    out.push_back({Eigen::VectorXd::Zero(n), 0});
  } else {
    throw InvalidInput("no closed-form stationary points for this surface");
  }
  return out;
}

FdHessian fd_hessian(const ForceFn& forces, const Eigen::VectorXd& x, double h) {
  require(h > 0.0 && std::isfinite(h), "finite-difference step must be positive");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd raw(n, n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    xp(j) = x(j) + h;
    const Eigen::VectorXd fp = forces(xp);
    if (fp.size() != n || !fp.allFinite())
      throw NumericalError(fmt::format("non-finite force at displacement +h along coordinate {}", j));
    xp(j) = x(j) - h;
    const Eigen::VectorXd fm = forces(xp);
    if (fm.size() != n || !fm.allFinite())
      throw NumericalError(fmt::format("non-finite force at displacement -h along coordinate {}", j));
    xp(j) = x(j);
    raw.col(j) = -(fp - fm) / (2.0 * h);
  }
  FdHessian out;
  out.asymmetry = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  out.hessian = 0.5 * (raw + raw.transpose());
  return out;
}

std::vector<Sample> gen_dataset(const PotentialSpec& spec, const Molecule& reference, const DatasetSpec& ds) {
  require(ds.n_samples >= 0, "n_samples must be non-negative");
  require(ds.noise >= 0.0, "noise must be non-negative");
  require(spec.kind != PotentialKind::generic_nd, "datasets are built from molecular potentials");
  const auto potential = make_potential(spec, &reference);
  std::mt19937_64 rng(ds.seed);
  // Each Cartesian component gets sigma = noise / sqrt(3), so the RMS displacement length is `noise`.
  std::normal_distribution<double> normal(0.0, ds.noise / std::sqrt(3.0));
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(ds.n_samples));
  const int n = reference.size();
  for (int s = 0; s < ds.n_samples; ++s) {
    Molecule mol = reference;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000) throw NumericalError("could not draw a geometry above min_pair_distance");
      for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) mol.positions(i, c) = reference.positions(i, c) + normal(rng);
      double closest = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) closest = std::min(closest, (mol.positions.row(i) - mol.positions.row(j)).norm());
      if (closest > std::max(ds.min_pair_distance, 1e-6)) break;
    }
    const Evaluation ev = potential->evaluate(mol.coordinates(), true);
    Sample sample{mol, ev.energy, Positions(n, 3), *ev.hessian};
    sample.forces = Eigen::Map<const Positions>(ev.gradient.data(), n, 3) * -1.0;
    out.push_back(std::move(sample));
  }
  return out;
}

Molecule reference_cluster(int n_atoms, double bond, int atomic_number) {
  require(n_atoms >= 1, "cluster needs at least one atom");
  require(bond > 0.0, "bond length must be positive");
  Positions pos(n_atoms, 3);
  if (n_atoms <= 4) {
    const Eigen::Matrix<double, 4, 3, Eigen::RowMajor> tetra =
        (Eigen::Matrix<double, 4, 3, Eigen::RowMajor>() << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1).finished() *
        (bond / std::sqrt(8.0));
    if (n_atoms == 1) pos.setZero();
    if (n_atoms == 2) pos << 0, 0, 0, 0, 0, bond;
    if (n_atoms == 3) pos << 0, 0, 0, bond, 0, 0, 0.5 * bond, 0.5 * std::sqrt(3.0) * bond, 0;
    if (n_atoms == 4) pos = tetra;
  } else {
    // fcc lattice points ordered by distance from a lattice site, ties broken lexicographically.
    std::vector<Eigen::Vector3d> pts;
    const double a = bond * std::sqrt(2.0);
    for (int i = -3; i <= 3; ++i)
      for (int j = -3; j <= 3; ++j)
        for (int k = -3; k <= 3; ++k)
          if ((i + j + k) % 2 == 0) pts.emplace_back(0.5 * a * i, 0.5 * a * j, 0.5 * a * k);
    std::stable_sort(pts.begin(), pts.end(), [](const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
      return p.squaredNorm() < q.squaredNorm() - 1e-9;
    });
    require(static_cast<std::size_t>(n_atoms) <= pts.size(), "cluster too large");
    for (int i = 0; i < n_atoms; ++i) pos.row(i) = pts[static_cast<std::size_t>(i)].transpose();
  }
  return Molecule::make(std::vector<int>(static_cast<std::size_t>(n_atoms), atomic_number), pos);
}

}  // namespace eqhess
