#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eqhess/molecule.hpp"
#include "eqhess/sample.hpp"

namespace eqhess {

struct Evaluation {
  double energy = 0.0;
  Eigen::VectorXd gradient;
  std::optional<Eigen::MatrixXd> hessian;

  Eigen::VectorXd forces() const { return -gradient; }
};

/// Energy surface over a flat coordinate vector. Molecular surfaces use
/// atom-major Cartesian coordinates in Angstrom and energies in eV.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual int dimension() const = 0;
  virtual Evaluation evaluate(const Eigen::VectorXd& x, bool with_hessian) const = 0;
  /// Mass attached to each coordinate (amu); 1 for abstract surfaces.
  virtual Eigen::VectorXd coordinate_masses() const = 0;
  /// Atom types and masses for molecular surfaces, nullptr otherwise.
  virtual const Molecule* atoms() const { return nullptr; }

  double energy(const Eigen::VectorXd& x) const { return evaluate(x, false).energy; }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const { return *evaluate(x, true).hessian; }
};

enum class PotentialKind { harmonic_bond, morse, lennard_jones, generic_nd };
enum class SurfaceKind { quadratic_bowl, double_well, multi_well, muller_brown };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::lennard_jones;
  // harmonic_bond: E = k/2 (r - r0)^2 per pair
  double k = 10.0;   // eV/A^2
  double r0 = 1.0;   // A, also the Morse equilibrium distance
  // morse: E = De (1 - exp(-a (r - r0)))^2 per pair
  double de = 1.0;   // eV
  double a = 2.0;    // 1/A
  // lennard_jones: E = 4 eps ((s/r)^12 - (s/r)^6) per pair
  double epsilon = 0.25;  // eV
  double sigma = 2.5;     // A

  SurfaceKind surface = SurfaceKind::double_well;
  int dimension = 2;
  /// quadratic_bowl curvatures (length = dimension) or multi_well barrier
  /// heights; empty means all ones.
  std::vector<double> coefficients;
  /// double_well: E = h (x0^2 - 1)^2 + sum_i stiffness/2 (x_i - coupling x0^2)^2
  double well_height = 1.0;
  double stiffness = 1.0;
  double coupling = 0.0;
  double energy_scale = 1.0;  // muller_brown prefactor

  void validate() const;
};

PotentialKind parse_potential_kind(const std::string& name);
SurfaceKind parse_surface_kind(const std::string& name);
std::string to_string(PotentialKind kind);
std::string to_string(SurfaceKind kind);

/// Pairwise kinds need `atoms`; generic_nd ignores it.
std::unique_ptr<Potential> make_potential(const PotentialSpec& spec, const Molecule* atoms = nullptr);

/// Pair energy and its first two radial derivatives.
struct PairTerm {
  double energy, first, second;
};
PairTerm pair_term(const PotentialSpec& spec, double r);

/// A stationary point of an abstract surface with its number of negative
/// Hessian eigenvalues.
struct StationaryPoint {
  Eigen::VectorXd x;
  int order;
};

/// Closed-form stationary points of double_well and multi_well surfaces.
std::vector<StationaryPoint> known_stationary_points(const PotentialSpec& spec);

using ForceFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct FdHessian {
  Eigen::MatrixXd hessian;  // symmetrised
  double asymmetry = 0.0;   // max |H - H^T| before symmetrisation
};

/// Central differences of the forces: column j is -(F(x + h e_j) - F(x - h e_j)) / 2h.
FdHessian fd_hessian(const ForceFn& forces, const Eigen::VectorXd& x, double h = 1e-3);

struct DatasetSpec {
  int n_samples = 100;
  /// Root-mean-square atomic displacement length (Angstrom).
  double noise = 0.1;
  /// Draws closer than this are redrawn; 0 keeps every draw.
  double min_pair_distance = 0.0;
  std::uint64_t seed = 0;
};

/// Gaussian perturbations of `reference` labelled by the oracle.
std::vector<Sample> gen_dataset(const PotentialSpec& spec, const Molecule& reference, const DatasetSpec& ds);

/// Atom positions of a regular n-atom reference cluster for pairwise
/// potentials: dimer, triangle, tetrahedron, or a compact fcc fragment.
Molecule reference_cluster(int n_atoms, double bond, int atomic_number = 18);

}  // namespace eqhess
