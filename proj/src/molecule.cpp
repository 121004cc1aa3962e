#include "eqhess/molecule.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "eqhess/elements.hpp"
#include "eqhess/error.hpp"

namespace eqhess {

Molecule Molecule::make(std::vector<int> atomic_numbers, Positions positions) {
  Eigen::VectorXd masses(static_cast<Eigen::Index>(atomic_numbers.size()));
  for (std::size_t i = 0; i < atomic_numbers.size(); ++i) {
    require(atomic_numbers[i] >= 1 && atomic_numbers[i] <= max_atomic_number,
            fmt::format("unsupported atomic number {}", atomic_numbers[i]));
    masses(static_cast<Eigen::Index>(i)) = standard_mass(atomic_numbers[i]);
  }
  return make(std::move(atomic_numbers), std::move(positions), std::move(masses));
}

Molecule Molecule::make(std::vector<int> atomic_numbers, Positions positions,
                        Eigen::VectorXd masses) {
  Molecule mol{std::move(atomic_numbers), std::move(positions), std::move(masses)};
  validate(mol);
  return mol;
}

Eigen::VectorXd Molecule::coordinates() const {
  return Eigen::Map<const Eigen::VectorXd>(positions.data(), positions.size());
}

Molecule Molecule::with_coordinates(const Eigen::VectorXd& flat) const {
  require(flat.size() == positions.size(), "coordinate vector has wrong length");
  Molecule out = *this;
  out.positions = Eigen::Map<const Positions>(flat.data(), size(), 3);
  return out;
}

Eigen::VectorXd Molecule::coordinate_masses() const {
  Eigen::VectorXd m(3 * size());
  for (int i = 0; i < size(); ++i) m.segment<3>(3 * i).setConstant(masses(i));
  return m;
}

void validate(const Molecule& mol) {
  const int n = mol.size();
  require(n >= 1, "molecule must contain at least one atom");
  require(mol.positions.rows() == n, "positions and atomic numbers disagree in length");
  require(mol.masses.size() == n, "masses and atomic numbers disagree in length");
  require(mol.positions.allFinite(), "non-finite atomic position");
  for (int i = 0; i < n; ++i) {
    require(mol.masses(i) > 0.0, fmt::format("atom {} has non-positive mass", i));
    for (int j = i + 1; j < n; ++j) {
      const double d = (mol.positions.row(j) - mol.positions.row(i)).norm();
      require(d > 1e-6, fmt::format("atoms {} and {} coincide", i, j));
    }
  }
}

Graph build_graph(const Molecule& mol, double cutoff) {
  require(cutoff > 0.0, "cutoff must be positive");
  validate(mol);
  Graph g;
  g.n_atoms = mol.size();
  g.cutoff = cutoff;
  g.first_edge.push_back(0);
  for (int i = 0; i < g.n_atoms; ++i) {
    const auto begin = g.edges.size();
    for (int j = 0; j < g.n_atoms; ++j) {
      if (j == i) continue;
      const Eigen::Vector3d r = (mol.positions.row(j) - mol.positions.row(i)).transpose();
      const double d = r.norm();
      if (d <= cutoff) g.edges.push_back({i, j, r, d});
    }
    std::sort(g.edges.begin() + static_cast<std::ptrdiff_t>(begin), g.edges.end(),
              [](const Edge& a, const Edge& b) {
                return std::lexicographical_compare(a.displacement.data(), a.displacement.data() + 3,
                                                    b.displacement.data(), b.displacement.data() + 3);
              });
    g.first_edge.push_back(static_cast<int>(g.edges.size()));
  }
  return g;
}

}  // namespace eqhess
