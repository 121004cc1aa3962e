#include "eqhess/workbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>

#include "eqhess/error.hpp"
#include "eqhess/irreps.hpp"
#include "eqhess/losses.hpp"
#include "eqhess/training.hpp"
#include "eqhess/vibrational.hpp"

namespace eqhess {

Molecule noised_geometry(const Molecule& reference, double noise, std::uint64_t seed) {
  require(noise >= 0.0, "noise must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, noise / std::sqrt(3.0));
  Molecule out = reference;
  for (int i = 0; i < out.size(); ++i)
    for (int c = 0; c < 3; ++c) out.positions(i, c) += normal(rng);
  return out;
}

Molecule random_molecule(int n_atoms, std::mt19937_64& rng) {
  require(n_atoms >= 1, "need at least one atom");
  const double box = 1.6 * std::cbrt(static_cast<double>(n_atoms));
  std::uniform_real_distribution<double> coord(-box / 2, box / 2);
  std::uniform_int_distribution<int> species(1, 8);
  Positions pos(n_atoms, 3);
  for (int i = 0; i < n_atoms; ++i) {
    for (;;) {
      pos.row(i) = Eigen::RowVector3d(coord(rng), coord(rng), coord(rng));
      bool clear = true;
      for (int j = 0; j < i && clear; ++j) clear = (pos.row(i) - pos.row(j)).norm() > 0.9;
      if (clear) break;
    }
  }
  std::vector<int> z(static_cast<std::size_t>(n_atoms));
  for (int& x : z) x = species(rng);
  return Molecule::make(std::move(z), std::move(pos));
}

MethodSpec MethodSpec::parse(const std::string& text, const HessianSource& default_source) {
  MethodSpec spec;
  const auto colon = text.find(':');
  spec.method = parse_method(text.substr(0, colon));
  if (spec.method == Method::rfo) {
    spec.hessian = colon == std::string::npos ? default_source : HessianSource::parse(text.substr(colon + 1));
    spec.label = "rfo:" + spec.hessian->name();
  } else {
    require(colon == std::string::npos, fmt::format("method '{}' takes no Hessian source", text));
    spec.label = to_string(spec.method);
  }
  return spec;
}

std::vector<ComparisonRow> compare_methods(const PotentialSpec& spec, const Molecule& reference, double noise,
                                           std::uint64_t seed0, int n_seeds, const std::vector<MethodSpec>& methods,
                                           const ConvergenceCriteria& criteria, const OptConfig& cfg,
                                           const HessianModel* model, const ModelParams* params) {
  require(n_seeds >= 1, "need at least one seed");
  std::vector<ComparisonRow> rows;
  for (int k = 0; k < n_seeds; ++k) {
    const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(k);
    const Molecule start = noised_geometry(reference, noise, seed);
    const auto potential = make_potential(spec, &start);
    for (const MethodSpec& m : methods) {
      HessianSetup setup;
      if (m.hessian) setup = resolve_hessian(*m.hessian, *potential, model, params);
      const OptResult r = optimize(*potential, start.coordinates(), m.method, setup, criteria, cfg);
      rows.push_back({m.label, seed, r.steps, r.converged, r.termination, potential->energy(r.final_x()),
                      r.wall_ms});
    }
  }
  return rows;
}

double median(std::vector<double> values) {
  require(!values.empty(), "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<MethodMedian> median_steps(const std::vector<ComparisonRow>& rows) {
  std::vector<std::string> labels;
  for (const auto& r : rows)
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  std::vector<MethodMedian> out;
  for (const auto& label : labels) {
    std::vector<double> steps;
    int converged = 0;
    for (const auto& r : rows) {
      if (r.label != label) continue;
      steps.push_back(r.steps);
      converged += r.converged ? 1 : 0;
    }
    out.push_back({label, median(steps), converged, static_cast<int>(steps.size())});
  }
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "method,seed,steps,converged,termination,final_energy,wall_ms\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{:.12g},{:.4f}\n", r.label, r.seed, r.steps, r.converged ? 1 : 0,
                       to_string(r.termination), r.final_energy, r.wall_ms);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

BenchReport run_bench(const HessianModel& model, const ModelParams& params, const std::vector<int>& sizes,
                      int repeats, std::uint64_t seed, double fd_step) {
  require(repeats >= 1, "bench needs at least one repeat");
  const auto wall = Clock::now();
  const ModelConfig& cfg = model.config();
  const long long node_dim = model.node_layout().total_dim();
  const long long pair_dim = model.pair_layout().total_dim();
  const long long basis_dim = cfg.radial_basis + (cfg.l_max + 1) * (cfg.l_max + 1);
  BenchReport report;
  report.repeats = repeats;
  std::mt19937_64 rng(seed);
  for (int n : sizes) {
    require(n >= 2, "bench sizes must be at least 2");
    const Molecule mol = random_molecule(n, rng);
    BenchRow row;
    row.n_atoms = n;
    row.edges = static_cast<int>(build_graph(mol, cfg.cutoff).edges.size());

    std::vector<double> predict, fd;
    for (int r = 0; r < repeats; ++r) {
      auto t0 = Clock::now();
      const Eigen::MatrixXd h = model.predict_hessian(mol, params);
      predict.push_back(elapsed_ms(t0));
      require(h.allFinite(), "predicted Hessian is not finite");

      t0 = Clock::now();
      const ForceFn forces = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const Positions f = model.forward(mol.with_coordinates(x), params).forces;
        return Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
      };
      const FdHessian fdh = fd_hessian(forces, mol.coordinates(), fd_step);
      fd.push_back(elapsed_ms(t0));
      require(fdh.hessian.allFinite(), "finite-difference Hessian is not finite");
    }
    row.predict_ms = median(predict);
    row.fd_ms = median(fd);
    row.ratio = row.fd_ms / row.predict_ms;

    const long long n3 = 3LL * n;
    const long long layers = cfg.layers + cfg.head_layers + 1;
    const long long edge_basis = row.edges * basis_dim;
    row.predict_elements = n3 * n3 + layers * n * node_dim + edge_basis + row.edges * pair_dim;
    row.fd_elements = n3 * n3 + 2 * n3 + layers * n * node_dim + edge_basis;
    report.rows.push_back(row);
  }
  report.wall_s = elapsed_ms(wall) / 1000.0;
  return report;
}

std::string bench_csv(const BenchReport& report) {
  std::string out = "n_atoms,edges,predict_ms,fd_ms,ratio,predict_elements,fd_elements\n";
  for (const auto& r : report.rows)
    out += fmt::format("{},{},{:.4f},{:.4f},{:.3f},{},{}\n", r.n_atoms, r.edges, r.predict_ms, r.fd_ms, r.ratio,
                       r.predict_elements, r.fd_elements);
  return out;
}

std::vector<CheckRow> run_checks(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  ModelConfig cfg;
  cfg.channels = 4;
  cfg.radial_basis = 8;
  cfg.radial_hidden = 8;
  const HessianModel model(cfg);
  const ModelParams params = ModelParams::init(cfg, seed);

  const Molecule mol = random_molecule(6, rng);
  const Eigen::MatrixXd h = model.predict_hessian(mol, params);
  rows.push_back({"symmetry", h == h.transpose(), (h - h.transpose()).cwiseAbs().maxCoeff(), 0.0});

  const Rotation rot = Rotation::random(rng);
  Molecule turned = mol;
  for (int i = 0; i < mol.size(); ++i)
    turned.positions.row(i) = (rot.matrix() * mol.positions.row(i).transpose() + Eigen::Vector3d(0.3, -1.1, 0.7)).transpose();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3 * mol.size(), 3 * mol.size());
  for (int i = 0; i < mol.size(); ++i) q.block<3, 3>(3 * i, 3 * i) = rot.matrix();
  const Eigen::MatrixXd expected = q * h * q.transpose();
  const double equiv = (model.predict_hessian(turned, params) - expected).cwiseAbs().maxCoeff() /
                       std::max(1.0, h.cwiseAbs().maxCoeff());
  rows.push_back({"equivariance", equiv < 1e-10, equiv, 1e-10});

  PotentialSpec lj;
  const Molecule ref = reference_cluster(3, std::pow(2.0, 1.0 / 6.0) * lj.sigma);
  DatasetSpec ds;
  ds.n_samples = 1;
  ds.noise = 0.1;
  ds.seed = seed;
  const Sample sample = gen_dataset(lj, ref, ds).front();
  LossConfig loss;
  loss.kind = ElementwiseKind::mse;
  const SampleGradient g = grad_params(model, sample, params, loss);
  const std::vector<double> flat = params.flatten();
  const std::vector<double> grad = g.grad.flatten();
  std::uniform_int_distribution<std::size_t> pick(0, flat.size() - 1);
  double worst = 0.0;
  for (int t = 0; t < 6; ++t) {
    const std::size_t i = pick(rng);
    const double step = 1e-6 * std::max(1.0, std::abs(flat[i]));
    auto shifted = [&](double delta) {
      std::vector<double> f = flat;
      f[i] += delta;
      ModelParams p = params;
      p.unflatten(f);
      return loss_total(model.predict_hessian(sample.molecule, p), sample.hessian, loss);
    };
    const double fd = (shifted(step) - shifted(-step)) / (2.0 * step);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1e-3, std::abs(fd)));
  }
  rows.push_back({"gradient_vs_fd", worst < 1e-5, worst, 1e-5});

  const Molecule tetra = reference_cluster(4, std::pow(2.0, 1.0 / 6.0) * lj.sigma);
  const auto potential = make_potential(lj, &tetra);
  const Eigen::MatrixXd oracle = potential->hessian(tetra.coordinates());
  const ProjectedHessian proj =
      eckart_project(mass_weight(oracle, tetra.coordinate_masses()), eckart_basis(tetra));
  Eigen::VectorXd translation = Eigen::VectorXd::Zero(12);
  for (int i = 0; i < 4; ++i) translation(3 * i) = std::sqrt(tetra.masses(i));
  translation.normalize();
  const double residual = (proj.basis * translation).norm();
  rows.push_back({"eckart_nullspace", residual < 1e-8 && proj.removed == 6, residual, 1e-8});

  PotentialSpec bowl;
  bowl.kind = PotentialKind::generic_nd;
  bowl.surface = SurfaceKind::quadratic_bowl;
  bowl.dimension = 4;
  bowl.coefficients = {0.5, 1.0, 2.0, 4.0};
  const auto quad = make_potential(bowl);
  const OptResult opt = optimize(*quad, Eigen::VectorXd::Constant(4, 0.04), Method::rfo,
                                 resolve_hessian(HessianSource::parse("oracle"), *quad),
                                 criteria_preset("default"));
  rows.push_back({"rfo_quadratic_steps", opt.converged && opt.steps <= 2, double(opt.steps), 2.0});
  return rows;
}

}  // namespace eqhess
