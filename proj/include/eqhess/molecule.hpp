#pragma once

#include <Eigen/Dense>
#include <vector>

namespace eqhess {

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Atoms with positions in Angstrom and masses in amu.
struct Molecule {
  std::vector<int> atomic_numbers;
  Positions positions;
  Eigen::VectorXd masses;

  /// Validates and fills masses from the built-in table.
  static Molecule make(std::vector<int> atomic_numbers, Positions positions);
  static Molecule make(std::vector<int> atomic_numbers, Positions positions,
                       Eigen::VectorXd masses);

  int size() const { return static_cast<int>(atomic_numbers.size()); }
  /// Positions flattened atom-major: (x0, y0, z0, x1, ...).
  Eigen::VectorXd coordinates() const;
  Molecule with_coordinates(const Eigen::VectorXd& flat) const;
  /// Masses repeated per Cartesian coordinate.
  Eigen::VectorXd coordinate_masses() const;
};

/// Throws InvalidInput unless the molecule is non-empty, masses are positive
/// and no two atoms are closer than 1e-6 Angstrom.
void validate(const Molecule& mol);

struct Edge {
  int source;  // atom receiving the message
  int target;  // neighbour the message is read from
  Eigen::Vector3d displacement;  // r_target - r_source
  double distance;
};

/// Directed neighbour graph. Edges are grouped by source atom in ascending
/// order, and within a group sorted lexicographically by displacement, so
/// that relabelling atoms never changes the order of a neighbour sum.
struct Graph {
  int n_atoms = 0;
  double cutoff = 0.0;
  std::vector<Edge> edges;
  /// edges[first_edge[i] .. first_edge[i + 1]) have source i.
  std::vector<int> first_edge;
};

Graph build_graph(const Molecule& mol, double cutoff);

}  // namespace eqhess
