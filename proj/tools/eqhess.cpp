// Command-line workbench: dataset generation, training, Hessian prediction
// and the downstream vibrational, optimization, saddle and path workflows.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <functional>
#include <iostream>
#include <map>

#include "eqhess/error.hpp"
#include "eqhess/io.hpp"
#include "eqhess/irc.hpp"
#include "eqhess/model.hpp"
#include "eqhess/optimizers.hpp"
#include "eqhess/potentials.hpp"
#include "eqhess/training.hpp"
#include "eqhess/units.hpp"
#include "eqhess/vibrational.hpp"
#include "eqhess/workbench.hpp"

namespace fs = std::filesystem;
using namespace eqhess;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_numerical = 2;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, criteria, hessian, geometry, checkpoint;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    c.data.seed = *o.seed;
    c.train.seed = *o.seed;
  }
  if (o.out) c.output = *o.out;
  if (o.criteria) c.criteria = *o.criteria;
  if (o.hessian) c.hessian = *o.hessian;
  if (o.geometry) {
    c.geometry = *o.geometry;
    c.start.reset();
  }
  if (o.checkpoint) c.checkpoint = *o.checkpoint;
  c.validate();
  return c;
}

Json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void write_summary(const RunConfig& c, const std::string& command, Json summary) {
  summary["command"] = command;
  const fs::path path = fs::path(c.output) / (command + ".json");
  write_text_file(path, summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
}

const PotentialSpec& need_potential(const RunConfig& c) {
  if (!c.potential) throw InvalidInput("this command needs a 'potential' section");
  return *c.potential;
}

bool is_surface(const PotentialSpec& s) { return s.kind == PotentialKind::generic_nd; }

double default_bond(const PotentialSpec& s) {
  return s.kind == PotentialKind::lennard_jones ? std::pow(2.0, 1.0 / 6.0) * s.sigma : s.r0;
}

std::vector<XyzFrame> geometry_frames(const RunConfig& c) {
  if (!c.geometry) throw InvalidInput("this command needs a 'geometry' XYZ file");
  return parse_xyz(read_text_file(*c.geometry));
}

/// Geometry file if given, otherwise the configured reference cluster.
Molecule molecule_or_reference(const RunConfig& c) {
  if (c.geometry) return geometry_frames(c).front().molecule;
  const PotentialSpec& spec = need_potential(c);
  return reference_cluster(c.reference_atoms, c.reference_bond.value_or(default_bond(spec)), c.reference_element);
}

/// The system a surface or molecular command acts on: the potential, the
/// molecule when there is one, and the start coordinates.
struct System {
  std::optional<Molecule> molecule;
  std::unique_ptr<Potential> potential;
  Eigen::VectorXd x;
};

System make_system(const RunConfig& c) {
  const PotentialSpec& spec = need_potential(c);
  System s;
  if (is_surface(spec)) {
    if (c.geometry) throw InvalidInput("abstract surfaces take a 'start' point, not a geometry file");
    s.potential = make_potential(spec);
    if (c.start) {
      s.x = Eigen::Map<const Eigen::VectorXd>(c.start->data(), static_cast<Eigen::Index>(c.start->size()));
    } else {
      s.x = Eigen::VectorXd::Zero(spec.dimension);
    }
    require(s.x.size() == spec.dimension, "start point does not match the surface dimension");
  } else {
    if (c.start) throw InvalidInput("molecular potentials take a geometry file, not a 'start' point");
    s.molecule = molecule_or_reference(c);
    s.potential = make_potential(spec, &*s.molecule);
    s.x = s.molecule->coordinates();
  }
  return s;
}

struct LoadedModel {
  HessianModel model;
  ModelParams params;
};

std::optional<LoadedModel> maybe_model(const RunConfig& c) {
  if (!c.checkpoint) return std::nullopt;
  Checkpoint ck = load_checkpoint(*c.checkpoint);
  return LoadedModel{HessianModel(ck.config), std::move(ck.params)};
}

/// Cartesian Hessian at x from a file or a non-quasi-Newton source.
Eigen::MatrixXd hessian_for(const RunConfig& c, const System* sys, const Molecule* mol, const LoadedModel* lm,
                            const Eigen::VectorXd& x) {
  if (c.hessian_file) return hessian_from_json(Json::parse(read_text_file(*c.hessian_file)));
  const HessianSource source = HessianSource::parse(c.hessian);
  if (source.kind == HessianKind::bfgs) throw InvalidInput("a quasi-Newton source cannot supply a single Hessian");
  if (source.kind == HessianKind::model) {
    require(lm && mol, "model Hessians need a checkpoint and a molecule");
    return lm->model.predict_hessian(mol->with_coordinates(x), lm->params);
  }
  require(sys != nullptr, fmt::format("Hessian source '{}' needs a potential", c.hessian));
  return resolve_hessian(source, *sys->potential, nullptr, nullptr, c.fd_step).evaluate(x);
}

Json report_json(const VibrationalReport& r) {
  return {{"classification", to_string(r.classification)},
          {"n_negative", r.n_negative},
          {"eigenvalues", vector_json(r.eigenvalues)},
          {"frequencies_cm1", vector_json(frequencies_invcm(r))},
          {"zpe_ev", r.zpe}};
}

Json step_history(const OptResult& r) {
  Json h = Json::array();
  for (const auto& s : r.history)
    h.push_back({{"energy", s.energy}, {"max_force", s.max_force}, {"rms_force", s.rms_force},
                 {"max_step", s.max_step}, {"rms_step", s.rms_step}, {"trust", s.trust}});
  return h;
}

std::string trajectory_xyz(const Molecule& mol, const Potential& p, const std::vector<Eigen::VectorXd>& frames) {
  std::string out;
  for (std::size_t i = 0; i < frames.size(); ++i)
    out += format_xyz(mol.with_coordinates(frames[i]), fmt::format("step={} energy={:.12g}", i, p.energy(frames[i])));
  return out;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const RunConfig& c) {
  const PotentialSpec& spec = need_potential(c);
  if (is_surface(spec)) throw InvalidInput("datasets need a molecular potential");
  const Molecule ref = molecule_or_reference(c);
  const auto samples = gen_dataset(spec, ref, c.data);
  const fs::path out(c.output);
  write_text_file(out / "dataset.jsonl", format_dataset(samples));
  write_text_file(out / "reference.xyz", format_xyz(ref, "reference"));
  double sq = 0.0;
  for (const auto& s : samples) sq += (s.molecule.positions - ref.positions).rowwise().squaredNorm().sum();
  const double rms = samples.empty() ? 0.0 : std::sqrt(sq / (samples.size() * ref.size()));
  write_summary(c, "gen-data",
                {{"n_samples", samples.size()},
                 {"n_atoms", ref.size()},
                 {"noise", c.data.noise},
                 {"rms_displacement", rms},
                 {"seed", c.data.seed},
                 {"dataset_hash", fmt::format("{:016x}", dataset_hash(samples))},
                 {"potential", to_json(spec)},
                 {"dataset", (out / "dataset.jsonl").string()}});
  return exit_ok;
}

int cmd_train(const RunConfig& c) {
  if (!c.dataset) throw InvalidInput("train needs a 'dataset' file");
  std::vector<Sample> train_set = parse_dataset(read_text_file(*c.dataset));
  std::vector<Sample> validation;
  if (c.validation_dataset) {
    validation = parse_dataset(read_text_file(*c.validation_dataset));
  } else {
    const auto n_val = static_cast<std::size_t>(std::floor(c.validation_fraction * train_set.size()));
    validation.assign(train_set.end() - static_cast<std::ptrdiff_t>(n_val), train_set.end());
    train_set.resize(train_set.size() - n_val);
  }
  require(!train_set.empty(), "training set is empty");
  if (validation.empty()) validation = train_set;

  const HessianModel model(c.model);
  const auto start = std::chrono::steady_clock::now();
  std::string curve_csv = "epoch,step,train,validation\n";
  const TrainResult r = train(model, train_set, validation, ModelParams::init(c.model, c.train.seed), c.loss,
                              c.train, [&](const EpochLoss& e) {
                                curve_csv += fmt::format("{},{},{:.10g},{:.10g}\n", e.epoch, e.step, e.train,
                                                         e.validation);
                              });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Checkpoint ck;
  ck.config = c.model;
  ck.params = r.params;
  ck.seed = c.train.seed;
  ck.dataset_hash = dataset_hash(train_set);
  ck.final_train_loss = r.curve.empty() ? r.initial_train : r.curve.back().train;
  ck.final_validation_loss = r.curve.empty() ? r.initial_validation : r.curve.back().validation;
  const fs::path out(c.output);
  save_checkpoint(out / "checkpoint.json", ck);
  write_text_file(out / "loss_curve.csv", curve_csv);
  write_summary(c, "train",
                {{"n_train", train_set.size()},
                 {"n_validation", validation.size()},
                 {"initial_validation", r.initial_validation},
                 {"final_validation", ck.final_validation_loss},
                 {"reduction", ck.final_validation_loss > 0.0 ? r.initial_validation / ck.final_validation_loss : 0.0},
                 {"target_scale", r.target_scale},
                 {"subspace_fallbacks", r.subspace_fallbacks},
                 {"seconds", seconds},
                 {"model", to_json(c.model)},
                 {"train", to_json(c.train)},
                 {"loss", to_json(c.loss)},
                 {"checkpoint", (out / "checkpoint.json").string()}});
  return exit_ok;
}

int cmd_predict(const RunConfig& c) {
  const auto lm = maybe_model(c);
  if (!lm) throw InvalidInput("predict needs a 'checkpoint'");
  const auto frames = geometry_frames(c);
  Json files = Json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Eigen::MatrixXd h = lm->model.predict_hessian(frames[i].molecule, lm->params);
    if (!h.allFinite()) throw NumericalError("predicted Hessian is not finite");
    const fs::path path =
        fs::path(c.output) / (frames.size() == 1 ? std::string("hessian.json") : fmt::format("hessian_{:03}.json", i));
    write_text_file(path, hessian_to_json(h).dump() + "\n");
    files.push_back(path.string());
  }
  write_summary(c, "predict", {{"frames", frames.size()}, {"files", files}, {"units", hessian_units}});
  return exit_ok;
}

int cmd_freq(const RunConfig& c) {
  const auto lm = maybe_model(c);
  std::optional<System> sys;
  if (c.potential) sys = make_system(c);
  std::optional<Molecule> mol;
  if (sys && sys->molecule) mol = sys->molecule;
  if (!sys) mol = geometry_frames(c).front().molecule;
  const Eigen::VectorXd x = mol ? mol->coordinates() : sys->x;
  const Eigen::MatrixXd h = hessian_for(c, sys ? &*sys : nullptr, mol ? &*mol : nullptr, lm ? &*lm : nullptr, x);
  require(h.rows() == x.size(), "Hessian does not match the geometry");
  const VibrationalReport r =
      mol ? analyze(*mol, h) : analyze_surface(h, sys->potential->coordinate_masses());
  Json s = report_json(r);
  s["hessian_source"] = c.hessian_file ? *c.hessian_file : c.hessian;
  s["n_modes"] = r.eigenvalues.size();
  write_summary(c, "freq", s);
  return exit_ok;
}

int cmd_zpe(const RunConfig& c) {
  const auto lm = maybe_model(c);
  Json rows = Json::array();
  if (c.potential && is_surface(*c.potential)) {
    System sys = make_system(c);
    const Eigen::MatrixXd h = hessian_for(c, &sys, nullptr, nullptr, sys.x);
    rows.push_back({{"frame", 0}, {"zpe_ev", analyze_surface(h, sys.potential->coordinate_masses()).zpe}});
  } else {
    std::vector<Molecule> mols;
    if (c.geometry) {
      mols = parse_xyz_molecules(read_text_file(*c.geometry));
    } else {
      mols.push_back(molecule_or_reference(c));
    }
    require(!(c.hessian_file && mols.size() > 1), "a Hessian file covers a single frame");
    for (std::size_t i = 0; i < mols.size(); ++i) {
      System sys;
      sys.molecule = mols[i];
      if (c.potential) sys.potential = make_potential(*c.potential, &mols[i]);
      const Eigen::MatrixXd h = hessian_for(c, c.potential ? &sys : nullptr, &mols[i], lm ? &*lm : nullptr,
                                            mols[i].coordinates());
      const VibrationalReport r = analyze(mols[i], h);
      rows.push_back({{"frame", i}, {"zpe_ev", r.zpe}, {"n_negative", r.n_negative},
                      {"classification", to_string(r.classification)}});
    }
  }
  write_summary(c, "zpe", {{"frames", rows}, {"hessian_source", c.hessian_file ? *c.hessian_file : c.hessian}});
  return exit_ok;
}

OptConfig opt_config(const RunConfig& c) {
  OptConfig o;
  o.max_steps = c.max_steps;
  return o;
}

int cmd_opt(const RunConfig& c) {
  const PotentialSpec& spec = need_potential(c);
  const auto lm = maybe_model(c);
  const HessianModel* model = lm ? &lm->model : nullptr;
  const ModelParams* params = lm ? &lm->params : nullptr;
  const HessianSource default_source = HessianSource::parse(c.hessian);
  std::vector<MethodSpec> methods;
  for (const auto& m : c.methods) methods.push_back(MethodSpec::parse(m, default_source));
  const ConvergenceCriteria criteria = criteria_preset(c.criteria);
  const fs::path out(c.output);

  if (c.n_seeds > 1 || c.noise > 0.0) {
    if (is_surface(spec)) throw InvalidInput("seed sweeps need a molecular potential");
    const Molecule ref = molecule_or_reference(c);
    const auto rows =
        compare_methods(spec, ref, c.noise, c.seed, c.n_seeds, methods, criteria, opt_config(c), model, params);
    write_text_file(out / "opt_methods.csv", comparison_csv(rows));
    Json medians = Json::array();
    bool all = true;
    for (const auto& m : median_steps(rows)) {
      medians.push_back({{"method", m.label}, {"median_steps", m.median_steps}, {"converged", m.converged},
                         {"runs", m.runs}});
      all = all && m.converged == m.runs;
    }
    write_summary(c, "opt", {{"criteria", c.criteria}, {"noise", c.noise}, {"seed", c.seed},
                             {"n_seeds", c.n_seeds}, {"medians", medians},
                             {"csv", (out / "opt_methods.csv").string()}});
    return all ? exit_ok : exit_numerical;
  }

  const System sys = make_system(c);
  Json runs = Json::array();
  bool all = true;
  for (const MethodSpec& m : methods) {
    HessianSetup setup;
    if (m.hessian) setup = resolve_hessian(*m.hessian, *sys.potential, model, params, c.fd_step);
    const OptResult r = optimize(*sys.potential, sys.x, m.method, setup, criteria, opt_config(c));
    all = all && r.converged;
    Json run = {{"method", m.label},
                {"converged", r.converged},
                {"termination", to_string(r.termination)},
                {"message", r.message},
                {"steps", r.steps},
                {"wall_ms", r.wall_ms},
                {"hessian_evaluations", r.hessian_evaluations},
                {"bfgs_skipped", r.bfgs_skipped},
                {"final_energy", sys.potential->energy(r.final_x())},
                {"final_x", vector_json(r.final_x())},
                {"history", step_history(r)}};
    if (sys.molecule) {
      std::string name = "opt_" + m.label + ".xyz";
      std::replace(name.begin(), name.end(), ':', '_');
      write_text_file(out / name, trajectory_xyz(*sys.molecule, *sys.potential, r.trajectory));
      run["trajectory"] = (out / name).string();
    }
    runs.push_back(std::move(run));
  }
  write_summary(c, "opt", {{"criteria", c.criteria}, {"runs", runs}});
  return all ? exit_ok : exit_numerical;
}

int cmd_ts(const RunConfig& c) {
  const auto lm = maybe_model(c);
  const System sys = make_system(c);
  const HessianSetup setup = resolve_hessian(HessianSource::parse(c.hessian), *sys.potential, lm ? &lm->model : nullptr,
                                             lm ? &lm->params : nullptr, c.fd_step);
  const TsResult r = ts_refine(*sys.potential, sys.x, setup, criteria_preset(c.criteria), opt_config(c));
  Json s = {{"success", r.success},
            {"converged", r.opt.converged},
            {"termination", to_string(r.opt.termination)},
            {"message", r.opt.message},
            {"steps", r.opt.steps},
            {"hessian_source", c.hessian},
            {"final_energy", sys.potential->energy(r.opt.final_x())},
            {"final_x", vector_json(r.opt.final_x())},
            {"report", report_json(r.report)}};
  if (sys.molecule) {
    const fs::path path = fs::path(c.output) / "ts.xyz";
    write_text_file(path, format_xyz(sys.molecule->with_coordinates(r.opt.final_x()),
                                     fmt::format("energy={:.12g}", sys.potential->energy(r.opt.final_x()))));
    s["geometry"] = path.string();
  }
  write_summary(c, "ts", s);
  return r.success ? exit_ok : exit_numerical;
}

int cmd_irc(const RunConfig& c) {
  const auto lm = maybe_model(c);
  const System sys = make_system(c);
  const Eigen::MatrixXd h = hessian_for(c, &sys, sys.molecule ? &*sys.molecule : nullptr, lm ? &*lm : nullptr, sys.x);
  IrcConfig cfg;
  cfg.step_size = c.irc_step;
  cfg.max_steps = c.irc_max_steps;
  cfg.gradient_rms = c.irc_gradient_rms;
  std::vector<Eigen::VectorXd> minima;
  if (!sys.molecule && (c.potential->surface == SurfaceKind::double_well || c.potential->surface == SurfaceKind::multi_well ||
                        c.potential->surface == SurfaceKind::quadratic_bowl))
    for (const auto& sp : known_stationary_points(*c.potential))
      if (sp.order == 0) minima.push_back(sp.x);
  const IrcResult r = irc_both(*sys.potential, sys.x, h, cfg, minima, c.irc_displacement);

  const fs::path out(c.output);
  Json branches = Json::array();
  for (const IrcPath* path : {&r.forward, &r.backward}) {
    Json b = {{"direction", to_string(path->direction)},
              {"converged", path->converged},
              {"message", path->message},
              {"frames", path->frames.size()},
              {"arc_length", path->frames.back().arc_length},
              {"terminal", vector_json(path->terminal())},
              {"terminal_energy", path->frames.back().energy}};
    if (path->matched_minimum) {
      b["matched_minimum"] = *path->matched_minimum;
      b["matched_rmsd"] = rmsd(*sys.potential, path->terminal(), minima[*path->matched_minimum]);
    } else {
      b["matched_minimum"] = nullptr;
    }
    if (sys.molecule) {
      std::string xyz;
      for (const auto& f : path->frames)
        xyz += format_xyz(sys.molecule->with_coordinates(f.x), fmt::format("energy={:.12g} arc={:.8g}", f.energy, f.arc_length));
      const fs::path file = out / fmt::format("irc_{}.xyz", to_string(path->direction));
      write_text_file(file, xyz);
      b["path"] = file.string();
    } else {
      Json frames = Json::array();
      for (const auto& f : path->frames)
        frames.push_back({{"x", vector_json(f.x)}, {"energy", f.energy}, {"arc_length", f.arc_length}});
      const fs::path file = out / fmt::format("irc_{}.json", to_string(path->direction));
      write_text_file(file, frames.dump() + "\n");
      b["path"] = file.string();
    }
    branches.push_back(std::move(b));
  }
  const bool ok = r.forward.converged && r.backward.converged;
  write_summary(c, "irc", {{"saddle", vector_json(sys.x)},
                           {"saddle_energy", sys.potential->energy(sys.x)},
                           {"mode", vector_json(r.starts.mode)},
                           {"branches", branches}});
  return ok ? exit_ok : exit_numerical;
}

int cmd_bench(const RunConfig& c) {
  auto lm = maybe_model(c);
  if (!lm) lm = LoadedModel{HessianModel(c.model), ModelParams::init(c.model, c.seed)};
  const BenchReport r = run_bench(lm->model, lm->params, c.bench_sizes, c.bench_repeats, c.seed, c.fd_step);
  const fs::path out(c.output);
  write_text_file(out / "bench.csv", bench_csv(r));
  Json rows = Json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& b = r.rows[i];
    rows.push_back({{"n_atoms", b.n_atoms}, {"edges", b.edges}, {"predict_ms", b.predict_ms}, {"fd_ms", b.fd_ms},
                    {"ratio", b.ratio}, {"predict_elements", b.predict_elements}, {"fd_elements", b.fd_elements}});
    if (i > 0) monotone = monotone && b.ratio > r.rows[i - 1].ratio;
  }
  write_summary(c, "bench", {{"repeats", r.repeats}, {"wall_s", r.wall_s}, {"ratio_monotone", monotone},
                             {"rows", rows}, {"csv", (out / "bench.csv").string()}});
  return exit_ok;
}

int cmd_check(const RunConfig& c) {
  const auto rows = run_checks(c.seed);
  Json table = Json::array();
  bool all = true;
  std::cerr << fmt::format("{:<22} {:<6} {:>12} {:>12}\n", "check", "result", "value", "tolerance");
  for (const auto& r : rows) {
    std::cerr << fmt::format("{:<22} {:<6} {:>12.3e} {:>12.3e}\n", r.name, r.pass ? "PASS" : "FAIL", r.value,
                             r.tolerance);
    table.push_back({{"name", r.name}, {"pass", r.pass}, {"value", r.value}, {"tolerance", r.tolerance}});
    all = all && r.pass;
  }
  write_summary(c, "check", {{"all_pass", all}, {"checks", table}});
  return all ? exit_ok : exit_numerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hessian prediction and vibrational workbench"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "seed for every random draw");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--criteria", o.criteria, "convergence preset")
      ->check(CLI::IsMember({"loose", "default", "tight", "very_tight"}));
  app.add_option("--hessian", o.hessian, "Hessian source")
      ->check(CLI::IsMember({"oracle", "fd", "model", "bfgs:unit", "bfgs:model", "bfgs:fd", "bfgs:oracle"}));
  app.add_option("--geometry", o.geometry, "XYZ geometry file")->check(CLI::ExistingFile);
  app.add_option("--checkpoint", o.checkpoint, "model checkpoint")->check(CLI::ExistingFile);

  const std::map<std::string, std::pair<std::string, std::function<int(const RunConfig&)>>> commands = {
      {"gen-data", {"label noised reference geometries with the oracle", cmd_gen_data}},
      {"train", {"fit the Hessian model to a dataset", cmd_train}},
      {"predict", {"predict Hessians for an XYZ file", cmd_predict}},
      {"freq", {"harmonic frequencies and stationary-point class", cmd_freq}},
      {"zpe", {"zero-point energies", cmd_zpe}},
      {"opt", {"local minimisation, single start or seed sweep", cmd_opt}},
      {"ts", {"saddle refinement and verification", cmd_ts}},
      {"irc", {"reaction path from a saddle in both directions", cmd_irc}},
      {"bench", {"direct prediction against finite differences of model forces", cmd_bench}},
      {"check", {"invariant battery", cmd_check}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = resolve_config(o);
    return commands.at(name).second(cfg);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
}
