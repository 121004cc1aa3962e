#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eqhess/error.hpp"
#include "eqhess/potentials.hpp"
#include "fixtures.hpp"
#include "test_support.hpp"

using namespace eqhess;
using namespace eqhess::testutil;

namespace {

PotentialSpec pair_spec(PotentialKind kind) {
  PotentialSpec s;
  s.kind = kind;
  return s;
}

PotentialSpec surface_spec(SurfaceKind kind, int dim) {
  PotentialSpec s;
  s.kind = PotentialKind::generic_nd;
  s.surface = kind;
  s.dimension = dim;
  return s;
}

Molecule perturbed(const Molecule& ref, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  Molecule out = ref;
  for (int i = 0; i < ref.size(); ++i)
    for (int c = 0; c < 3; ++c) out.positions(i, c) += n(rng);
  return out;
}

Eigen::VectorXd fd_gradient(const Potential& p, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x, dn = x;
    up(i) += h;
    dn(i) -= h;
    g(i) = (p.energy(up) - p.energy(dn)) / (2 * h);
  }
  return g;
}

ForceFn forces_of(const Potential& p) {
  return [&p](const Eigen::VectorXd& x) { return p.evaluate(x, false).forces(); };
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return max_abs(a - b) / max_abs(b); }

}  // namespace

TEST(PairPotentials, HarmonicBondAtEquilibrium) {
  const Molecule dimer = reference_cluster(2, 1.0);
  const auto p = make_potential(pair_spec(PotentialKind::harmonic_bond), &dimer);
  const Evaluation ev = p->evaluate(dimer.coordinates(), true);
  EXPECT_LT(ev.gradient.norm(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*ev.hessian);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(eig.eigenvalues()(i), 0.0, 1e-12);
  EXPECT_NEAR(eig.eigenvalues()(5), 20.0, 1e-12);
  Eigen::VectorXd translation(6);
  translation << 1, 0, 0, 1, 0, 0;
  EXPECT_LT((*ev.hessian * translation).norm(), 1e-12);
}

TEST(PairPotentials, LennardJonesMinimumHasZeroForce) {
  const PotentialSpec spec = pair_spec(PotentialKind::lennard_jones);
  EXPECT_NEAR(pair_term(spec, std::pow(2.0, 1.0 / 6.0) * spec.sigma).first, 0.0, 1e-14);
  const Molecule dimer = reference_cluster(2, std::pow(2.0, 1.0 / 6.0) * spec.sigma);
  const auto p = make_potential(spec, &dimer);
  EXPECT_LT(p->evaluate(dimer.coordinates(), false).gradient.norm(), 1e-14);
  EXPECT_NEAR(p->energy(dimer.coordinates()), -spec.epsilon, 1e-14);
}

TEST(PairPotentials, RejectsCoincidentAtoms) {
  const Molecule dimer = reference_cluster(2, 1.0);
  const auto p = make_potential(pair_spec(PotentialKind::morse), &dimer);
  EXPECT_THROW(p->evaluate(Eigen::VectorXd::Zero(6), false), InvalidInput);
}

TEST(PairPotentials, ForcesAndHessianMatchFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (PotentialKind kind : {PotentialKind::harmonic_bond, PotentialKind::morse, PotentialKind::lennard_jones}) {
    const double bond = kind == PotentialKind::lennard_jones ? 2.8 : 1.0;
    const Molecule mol = perturbed(reference_cluster(3, bond), 0.1, rng);
    const auto p = make_potential(pair_spec(kind), &mol);
    const Eigen::VectorXd x = mol.coordinates();
    const Evaluation ev = p->evaluate(x, true);
    EXPECT_LT(rel_err(fd_gradient(*p, x, 1e-5), ev.gradient), 1e-7) << to_string(kind);
    EXPECT_LT(rel_err(fd_hessian(forces_of(*p), x, 1e-5).hessian, *ev.hessian), 1e-6) << to_string(kind);
  }
}

TEST(PairPotentials, TranslationSumRuleAndRotation) {
  std::mt19937_64 rng(12);
  for (PotentialKind kind : {PotentialKind::harmonic_bond, PotentialKind::morse, PotentialKind::lennard_jones}) {
    const double bond = kind == PotentialKind::lennard_jones ? 2.8 : 1.0;
    const Molecule mol = perturbed(reference_cluster(6, bond), 0.1, rng);
    const auto p = make_potential(pair_spec(kind), &mol);
    const Eigen::MatrixXd h = p->hessian(mol.coordinates());
    const double scale = max_abs(h);
    for (int i = 0; i < 6; ++i) {
      Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
      for (int j = 0; j < 6; ++j) sum += h.block(3 * i, 3 * j, 3, 3);
      EXPECT_LT(sum.cwiseAbs().maxCoeff(), 1e-10 * scale);
    }
    const Rotation r = Rotation::random(rng);
    const Molecule rot = rotated(mol, r, Eigen::Vector3d(0.3, -1.0, 2.0));
    const Eigen::MatrixXd q = block_rotation(6, r);
    EXPECT_LT(max_abs(p->hessian(rot.coordinates()) - q * h * q.transpose()), 1e-10 * scale);
  }
}

TEST(FdHessian, ExactOnQuadratics) {
  PotentialSpec spec = surface_spec(SurfaceKind::quadratic_bowl, 4);
  spec.coefficients = {1.0, 2.5, 0.3, 7.0};
  const auto p = make_potential(spec);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd x(4);
  for (auto& v : x) v = n(rng);
  for (double h : {1e-1, 1e-3, 0.5}) {
    const FdHessian fd = fd_hessian(forces_of(*p), x, h);
    EXPECT_LT(max_abs(fd.hessian - p->hessian(x)), 1e-9);
  }
}

TEST(FdHessian, MorseDimerAtDefaultStep) {
  std::mt19937_64 rng(14);
  const Molecule mol = perturbed(reference_cluster(2, 1.0), 0.05, rng);
  const auto p = make_potential(pair_spec(PotentialKind::morse), &mol);
  const FdHessian fd = fd_hessian(forces_of(*p), mol.coordinates());
  const Eigen::MatrixXd exact = p->hessian(mol.coordinates());
  EXPECT_LT(rel_err(fd.hessian, exact), 1e-6);
  EXPECT_LT(fd.asymmetry, 1e-6 * max_abs(exact));
}

TEST(FdHessian, ReportsNonFiniteForces) {
  const ForceFn bad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd f = -x;
    if (x(1) > 0.5) f(0) = std::nan("");
    return f;
  };
  EXPECT_THROW(fd_hessian(bad, Eigen::VectorXd::Constant(2, 0.5), 1e-3), NumericalError);
}

TEST(Surfaces, GradientAndHessianMatchFiniteDifferences) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<PotentialSpec> specs = {surface_spec(SurfaceKind::quadratic_bowl, 3),
                                      surface_spec(SurfaceKind::double_well, 3),
                                      surface_spec(SurfaceKind::multi_well, 3),
                                      surface_spec(SurfaceKind::muller_brown, 2)};
  specs[1].coupling = 0.4;
  specs[1].stiffness = 3.0;
  specs[2].coefficients = {1.0, 0.5, 2.0};
  for (const auto& spec : specs) {
    const auto p = make_potential(spec);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd x(spec.dimension);
      for (auto& v : x) v = u(rng);
      const Evaluation ev = p->evaluate(x, true);
      EXPECT_LT(rel_err(fd_gradient(*p, x, 1e-5), ev.gradient), 1e-7) << to_string(spec.surface);
      EXPECT_LT(rel_err(fd_hessian(forces_of(*p), x, 1e-5).hessian, *ev.hessian), 1e-6) << to_string(spec.surface);
    }
  }
}

TEST(Surfaces, KnownStationaryPointsHaveStatedOrder) {
  std::vector<PotentialSpec> specs = {surface_spec(SurfaceKind::double_well, 4),
                                      surface_spec(SurfaceKind::multi_well, 3)};
  specs[0].coupling = 0.3;
  specs[1].coefficients = {1.0, 0.5, 2.0};
  for (const auto& spec : specs) {
    const auto p = make_potential(spec);
    for (const auto& sp : known_stationary_points(spec)) {
      const Evaluation ev = p->evaluate(sp.x, true);
      EXPECT_LT(ev.gradient.norm(), 1e-12);
      const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(*ev.hessian).eigenvalues();
      EXPECT_EQ((lam.array() < 0.0).count(), sp.order);
    }
  }
}

TEST(Surfaces, RejectInvalidSpecs) {
  PotentialSpec mb = surface_spec(SurfaceKind::muller_brown, 3);
  EXPECT_THROW(make_potential(mb), InvalidInput);
  PotentialSpec bowl = surface_spec(SurfaceKind::quadratic_bowl, 2);
  bowl.coefficients = {1.0};
  EXPECT_THROW(make_potential(bowl), InvalidInput);
  PotentialSpec morse = pair_spec(PotentialKind::morse);
  morse.de = -1.0;
  const Molecule dimer = reference_cluster(2, 1.0);
  EXPECT_THROW(make_potential(morse, &dimer), InvalidInput);
  EXPECT_THROW(make_potential(pair_spec(PotentialKind::morse)), InvalidInput);
}

TEST(GenDataset, ZeroNoiseGivesIdenticalSamples) {
  const Molecule ref = reference_cluster(4, 2.8);
  DatasetSpec ds;
  ds.n_samples = 5;
  ds.noise = 0.0;
  const auto samples = gen_dataset(pair_spec(PotentialKind::lennard_jones), ref, ds);
  ASSERT_EQ(samples.size(), 5u);
  for (const auto& s : samples) {
    EXPECT_TRUE(s.molecule.positions == ref.positions);
    EXPECT_TRUE(s.hessian == samples[0].hessian);
  }
}

TEST(GenDataset, DisplacementRmsMatchesRequest) {
  const Molecule ref = reference_cluster(4, 2.8);
  DatasetSpec ds;
  ds.n_samples = 1000;
  ds.noise = 0.2;
  ds.seed = 3;
  const auto samples = gen_dataset(pair_spec(PotentialKind::lennard_jones), ref, ds);
  double sum = 0.0;
  for (const auto& s : samples) sum += (s.molecule.positions - ref.positions).rowwise().squaredNorm().sum();
  const double rms = std::sqrt(sum / (1000.0 * 4.0));
  EXPECT_NEAR(rms, 0.2, 0.05 * 0.2);
}

TEST(GenDataset, DeterministicAndLabelledByOracle) {
  const Molecule ref = reference_cluster(4, 2.8);
  DatasetSpec ds;
  ds.n_samples = 10;
  ds.seed = 9;
  const PotentialSpec spec = pair_spec(PotentialKind::lennard_jones);
  const auto a = gen_dataset(spec, ref, ds);
  const auto b = gen_dataset(spec, ref, ds);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].molecule.positions == b[i].molecule.positions);
    EXPECT_TRUE(a[i].hessian == b[i].hessian);
    const auto p = make_potential(spec, &a[i].molecule);
    const Evaluation ev = p->evaluate(a[i].molecule.coordinates(), true);
    EXPECT_EQ(ev.energy, a[i].energy);
    EXPECT_TRUE(*ev.hessian == a[i].hessian);
    EXPECT_NO_THROW(validate(a[i]));
  }
}

TEST(ReferenceCluster, NearestNeighbourDistanceIsBond) {
  for (int n : {2, 3, 4, 5, 8, 13}) {
    const Molecule m = reference_cluster(n, 1.7);
    double closest = 1e9;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) closest = std::min(closest, (m.positions.row(i) - m.positions.row(j)).norm());
    EXPECT_NEAR(closest, 1.7, 1e-12) << n;
  }
}
