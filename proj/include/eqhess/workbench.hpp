#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eqhess/model.hpp"
#include "eqhess/optimizers.hpp"
#include "eqhess/potentials.hpp"

namespace eqhess {

/// Gaussian displacement of every coordinate with the given RMS atomic
/// displacement length, drawn from a generator seeded with `seed`.
Molecule noised_geometry(const Molecule& reference, double noise, std::uint64_t seed);

/// Random cluster of `n_atoms` (species 1..8) at roughly constant density,
/// no two atoms closer than 0.9 A.
Molecule random_molecule(int n_atoms, std::mt19937_64& rng);

/// Optimizer plus Hessian provider, written "sd", "fire", "rfo" (the
/// caller's default source) or "rfo:<source>", e.g. "rfo:bfgs:unit".
struct MethodSpec {
  Method method = Method::rfo;
  std::optional<HessianSource> hessian;
  std::string label;

  static MethodSpec parse(const std::string& text, const HessianSource& default_source);
};

struct ComparisonRow {
  std::string label;
  std::uint64_t seed;
  int steps;
  bool converged;
  Termination termination;
  double final_energy;
  double wall_ms;
};

struct MethodMedian {
  std::string label;
  double median_steps;
  int converged;
  int runs;
};

/// Every method from a noised copy of `reference` for seeds seed0 .. seed0 + n - 1.
std::vector<ComparisonRow> compare_methods(const PotentialSpec& spec, const Molecule& reference, double noise,
                                           std::uint64_t seed0, int n_seeds, const std::vector<MethodSpec>& methods,
                                           const ConvergenceCriteria& criteria, const OptConfig& cfg = {},
                                           const HessianModel* model = nullptr, const ModelParams* params = nullptr);

/// Per-label median of the step counts, labels in first-seen order.
std::vector<MethodMedian> median_steps(const std::vector<ComparisonRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

double median(std::vector<double> values);

struct BenchRow {
  int n_atoms = 0;
  int edges = 0;
  double predict_ms = 0.0;
  double fd_ms = 0.0;
  double ratio = 0.0;
  /// Doubles held by the largest live buffers of each path.
  long long predict_elements = 0;
  long long fd_elements = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  int repeats = 0;
  double wall_s = 0.0;
};

/// Median wall time of one predicted Hessian against central differences of
/// the model's direct forces (6N forward passes) for each molecule size.
BenchReport run_bench(const HessianModel& model, const ModelParams& params, const std::vector<int>& sizes,
                      int repeats, std::uint64_t seed, double fd_step = 1e-3);
std::string bench_csv(const BenchReport& report);

struct CheckRow {
  std::string name;
  bool pass;
  double value;
  double tolerance;
};

/// Invariant battery: equivariance, symmetry, parameter gradient against
/// finite differences, Eckart nullspace and RFO on a quadratic.
std::vector<CheckRow> run_checks(std::uint64_t seed);

}  // namespace eqhess
