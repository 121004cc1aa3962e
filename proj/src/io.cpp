#include "eqhess/io.hpp"

#include <charconv>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "eqhess/elements.hpp"
#include "eqhess/error.hpp"
#include "eqhess/optimizers.hpp"

namespace eqhess {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool blank(std::string_view line) { return tokens(line).empty(); }

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

[[noreturn]] void xyz_error(std::size_t line, const std::string& what) {
  throw InvalidInput(fmt::format("xyz line {}: {}", line + 1, what));
}

}  // namespace

std::vector<XyzFrame> parse_xyz(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<XyzFrame> frames;
  std::size_t i = 0;
  while (true) {
    while (i < lines.size() && blank(lines[i])) ++i;
    if (i >= lines.size()) break;
    const auto count_tokens = tokens(lines[i]);
    const auto count = count_tokens.size() == 1 ? parse_number<int>(count_tokens[0]) : std::nullopt;
    if (!count || *count <= 0) xyz_error(i, "expected a positive atom count");
    if (i + 1 >= lines.size()) xyz_error(i, "missing comment line");
    XyzFrame frame;
    frame.comment = std::string(lines[i + 1]);
    const std::size_t first_atom = i + 2;
    std::vector<int> z;
    Positions pos(*count, 3);
    for (int a = 0; a < *count; ++a) {
      const std::size_t ln = first_atom + a;
      if (ln >= lines.size() || blank(lines[ln]))
        xyz_error(std::min(ln, lines.size() - 1),
                  fmt::format("atom count {} but only {} atom lines", *count, a));
      const auto t = tokens(lines[ln]);
      if (t.size() < 4) xyz_error(ln, "expected 'Symbol x y z'");
      std::optional<int> number = atomic_number(t[0]);
      if (!number) {
        if (auto zn = parse_number<int>(t[0]); zn && *zn >= 1 && *zn <= max_atomic_number) number = zn;
      }
      if (!number) xyz_error(ln, fmt::format("unknown element '{}'", t[0]));
      z.push_back(*number);
      for (int c = 0; c < 3; ++c) {
        const auto v = parse_number<double>(t[1 + c]);
        if (!v || !std::isfinite(*v)) xyz_error(ln, fmt::format("malformed coordinate '{}'", t[1 + c]));
        pos(a, c) = *v;
      }
    }
    i = first_atom + *count;
    if (i < lines.size() && !blank(lines[i])) {
      const auto t = tokens(lines[i]);
      if (t.size() != 1 || !parse_number<int>(t[0]))
        xyz_error(i, fmt::format("atom count {} but more atom lines follow", *count));
    }
    try {
      frame.molecule = Molecule::make(std::move(z), std::move(pos));
    } catch (const InvalidInput& e) {
      xyz_error(first_atom, e.what());
    }
    frames.push_back(std::move(frame));
  }
  if (frames.empty()) throw InvalidInput("xyz: no frames");
  return frames;
}

std::vector<Molecule> parse_xyz_molecules(std::string_view text) {
  std::vector<Molecule> out;
  for (auto& f : parse_xyz(text)) out.push_back(std::move(f.molecule));
  return out;
}

std::string format_xyz(const Molecule& mol, std::string_view comment) {
  std::string out = fmt::format("{}\n{}\n", mol.size(), comment);
  for (int i = 0; i < mol.size(); ++i)
    out += fmt::format("{:<2} {:18.12f} {:18.12f} {:18.12f}\n", element_symbol(mol.atomic_numbers[i]),
                       mol.positions(i, 0), mol.positions(i, 1), mol.positions(i, 2));
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput(fmt::format("cannot write '{}'", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InvalidInput(fmt::format("write to '{}' failed", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  require(j.is_array(), "matrix must be a list of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[i];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols, "matrix rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      require(row[c].is_number(), "matrix entries must be numbers");
      m(i, c) = row[c].get<double>();
    }
  }
  return m;
}

Json hessian_to_json(const Eigen::MatrixXd& hessian) {
  require(hessian.rows() == hessian.cols() && hessian.rows() % 3 == 0, "Hessian must be 3N x 3N");
  return {{"n_atoms", hessian.rows() / 3}, {"units", hessian_units}, {"matrix", matrix_to_json(hessian)}};
}

Eigen::MatrixXd hessian_from_json(const Json& j) {
  require(j.is_object() && j.contains("n_atoms") && j.contains("matrix"), "Hessian JSON needs n_atoms and matrix");
  if (j.contains("units"))
    require(j["units"] == hessian_units, fmt::format("Hessian units must be {}", hessian_units));
  const int n = j["n_atoms"].get<int>();
  Eigen::MatrixXd h = matrix_from_json(j["matrix"]);
  require(n > 0 && h.rows() == 3 * n && h.cols() == 3 * n, "Hessian matrix does not match n_atoms");
  return h;
}

Json sample_to_json(const Sample& s) {
  validate(s);
  Json z = s.molecule.atomic_numbers;
  return {{"z", z},
          {"pos", matrix_to_json(s.molecule.positions)},
          {"energy", s.energy},
          {"forces", matrix_to_json(s.forces)},
          {"hessian", matrix_to_json(s.hessian)}};
}

Sample sample_from_json(const Json& j) {
  require(j.is_object(), "dataset entry must be an object");
  for (const char* key : {"z", "pos", "energy", "forces", "hessian"})
    require(j.contains(key), fmt::format("dataset entry lacks '{}'", key));
  for (auto it = j.begin(); it != j.end(); ++it)
    require(std::set<std::string>{"z", "pos", "energy", "forces", "hessian"}.count(it.key()),
            fmt::format("unknown dataset key '{}'", it.key()));
  Sample s;
  const Eigen::MatrixXd pos = matrix_from_json(j["pos"]);
  const Eigen::MatrixXd forces = matrix_from_json(j["forces"]);
  require(pos.cols() == 3 && forces.cols() == 3, "positions and forces need three columns");
  s.molecule = Molecule::make(j["z"].get<std::vector<int>>(), pos);
  s.energy = j["energy"].get<double>();
  s.forces = forces;
  s.hessian = matrix_from_json(j["hessian"]);
  validate(s);
  return s;
}

std::string format_dataset(const std::vector<Sample>& samples) {
  std::string out;
  for (const Sample& s : samples) {
    out += sample_to_json(s).dump();
    out += '\n';
  }
  return out;
}

std::vector<Sample> parse_dataset(std::string_view jsonl) {
  std::vector<Sample> out;
  const auto lines = split_lines(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    try {
      out.push_back(sample_from_json(Json::parse(lines[i])));
    } catch (const Json::exception& e) {
      throw InvalidInput(fmt::format("dataset line {}: {}", i + 1, e.what()));
    } catch (const InvalidInput& e) {
      throw InvalidInput(fmt::format("dataset line {}: {}", i + 1, e.what()));
    }
  }
  return out;
}

std::uint64_t dataset_hash(const std::vector<Sample>& samples) {
  std::uint64_t h = 14695981039346656037ull;
  auto bytes = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  auto value = [&bytes](auto v) { bytes(&v, sizeof v); };
  value(static_cast<std::uint64_t>(samples.size()));
  for (const Sample& s : samples) {
    value(static_cast<std::uint64_t>(s.molecule.size()));
    for (int z : s.molecule.atomic_numbers) value(static_cast<std::int32_t>(z));
    bytes(s.molecule.positions.data(), sizeof(double) * s.molecule.positions.size());
    value(s.energy);
    bytes(s.forces.data(), sizeof(double) * s.forces.size());
    bytes(s.hessian.data(), sizeof(double) * s.hessian.size());
  }
  return h;
}

namespace {

// Reads keys from one JSON object and rejects any it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidInput(fmt::format("'{}' must be an object", path_.empty() ? "config" : path_));
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    out = convert<T>(*it, key);
  }

  template <class T>
  void read(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    out = convert<T>(*it, key);
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InvalidInput(fmt::format("unknown configuration key '{}'", path(it.key().c_str())));
  }

 private:
  template <class T>
  T convert(const Json& v, const char* key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw InvalidInput(fmt::format("'{}' must be a boolean", path(key)));
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v.is_number()) throw InvalidInput(fmt::format("'{}' must be a number", path(key)));
      if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() && !v.is_number_unsigned())
          throw InvalidInput(fmt::format("'{}' must be an integer", path(key)));
      }
    }
    try {
      return v.get<T>();
    } catch (const Json::exception&) {
      throw InvalidInput(fmt::format("'{}' has the wrong type", path(key)));
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ElementwiseKind parse_elementwise(const std::string& s) {
  if (s == "mae") return ElementwiseKind::mae;
  if (s == "mse") return ElementwiseKind::mse;
  throw InvalidInput("elementwise loss must be 'mae' or 'mse'");
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "adamw") return OptimizerKind::adamw;
  throw InvalidInput("optimizer must be 'adam' or 'adamw'");
}

void read_model(ObjectReader& r, ModelConfig& c) {
  r.read("l_max", c.l_max);
  r.read("channels", c.channels);
  r.read("layers", c.layers);
  r.read("cutoff", c.cutoff);
  r.read("radial_basis", c.radial_basis);
  r.read("radial_hidden", c.radial_hidden);
  r.read("head_layers", c.head_layers);
  r.read("embedding_dim", c.embedding_dim);
  r.read("avg_neighbors", c.avg_neighbors);
}

void read_loss(ObjectReader& r, LossConfig& c) {
  std::string kind = c.kind == ElementwiseKind::mae ? "mae" : "mse";
  r.read("elementwise", kind);
  c.kind = parse_elementwise(kind);
  r.read("subspace_weight", c.subspace_weight);
  r.read("subspace_k", c.subspace_k);
}

void read_train(ObjectReader& r, TrainConfig& c) {
  r.read("steps", c.steps);
  r.read("batch_size", c.batch_size);
  r.read("learning_rate", c.learning_rate);
  std::string opt = c.optimizer == OptimizerKind::adam ? "adam" : "adamw";
  r.read("optimizer", opt);
  c.optimizer = parse_optimizer(opt);
  r.read("weight_decay", c.weight_decay);
  r.read("decay_every", c.decay_every);
  r.read("decay_factor", c.decay_factor);
  r.read("clip_norm", c.clip_norm);
  r.read("seed", c.seed);
  r.read("normalize_targets", c.normalize_targets);
}

void read_potential(ObjectReader& r, PotentialSpec& s) {
  std::string kind = to_string(s.kind);
  r.read("kind", kind);
  s.kind = parse_potential_kind(kind);
  r.read("k", s.k);
  r.read("r0", s.r0);
  r.read("de", s.de);
  r.read("a", s.a);
  r.read("epsilon", s.epsilon);
  r.read("sigma", s.sigma);
  std::string surface = to_string(s.surface);
  r.read("surface", surface);
  s.surface = parse_surface_kind(surface);
  r.read("dimension", s.dimension);
  r.read("coefficients", s.coefficients);
  r.read("well_height", s.well_height);
  r.read("stiffness", s.stiffness);
  r.read("coupling", s.coupling);
  r.read("energy_scale", s.energy_scale);
}

}  // namespace

Json to_json(const ModelConfig& c) {
  return {{"l_max", c.l_max},
          {"channels", c.channels},
          {"layers", c.layers},
          {"cutoff", c.cutoff},
          {"radial_basis", c.radial_basis},
          {"radial_hidden", c.radial_hidden},
          {"head_layers", c.head_layers},
          {"embedding_dim", c.embedding_dim},
          {"avg_neighbors", c.avg_neighbors}};
}

ModelConfig model_config_from_json(const Json& j) {
  ModelConfig c;
  ObjectReader r(j, "model");
  read_model(r, c);
  r.finish();
  c.validate();
  return c;
}

Json to_json(const LossConfig& c) {
  return {{"elementwise", c.kind == ElementwiseKind::mae ? "mae" : "mse"},
          {"subspace_weight", c.subspace_weight},
          {"subspace_k", c.subspace_k}};
}

LossConfig loss_config_from_json(const Json& j) {
  LossConfig c;
  ObjectReader r(j, "loss");
  read_loss(r, c);
  r.finish();
  c.validate();
  return c;
}

Json to_json(const TrainConfig& c) {
  return {{"steps", c.steps},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"optimizer", c.optimizer == OptimizerKind::adam ? "adam" : "adamw"},
          {"weight_decay", c.weight_decay},
          {"decay_every", c.decay_every},
          {"decay_factor", c.decay_factor},
          {"clip_norm", c.clip_norm},
          {"seed", c.seed},
          {"normalize_targets", c.normalize_targets}};
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  ObjectReader r(j, "train");
  read_train(r, c);
  r.finish();
  c.validate();
  return c;
}

Json to_json(const PotentialSpec& s) {
  Json j = {{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case PotentialKind::harmonic_bond:
      j["k"] = s.k;
      j["r0"] = s.r0;
      break;
    case PotentialKind::morse:
      j["de"] = s.de;
      j["a"] = s.a;
      j["r0"] = s.r0;
      break;
    case PotentialKind::lennard_jones:
      j["epsilon"] = s.epsilon;
      j["sigma"] = s.sigma;
      break;
    case PotentialKind::generic_nd:
      j["surface"] = to_string(s.surface);
      j["dimension"] = s.dimension;
      j["coefficients"] = s.coefficients;
      j["well_height"] = s.well_height;
      j["stiffness"] = s.stiffness;
      j["coupling"] = s.coupling;
      j["energy_scale"] = s.energy_scale;
      break;
  }
  return j;
}

PotentialSpec potential_spec_from_json(const Json& j) {
  PotentialSpec s;
  ObjectReader r(j, "potential");
  read_potential(r, s);
  r.finish();
  s.validate();
  return s;
}

Json checkpoint_to_json(const Checkpoint& c) {
  Json layout = Json::array();
  for (const auto& t : c.params.layout())
    layout.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", t.offset}});
  return {{"format", "eqhess-checkpoint"},
          {"version", 1},
          {"config", to_json(c.config)},
          {"layout", layout},
          {"params", c.params.flatten()},
          {"output_scale", c.params.output_scale},
          {"seed", c.seed},
          {"dataset_hash", fmt::format("{:016x}", c.dataset_hash)},
          {"final_losses", {{"train", c.final_train_loss}, {"validation", c.final_validation_loss}}}};
}

Checkpoint checkpoint_from_json(const Json& j) {
  try {
    require(j.is_object() && j.value("format", "") == "eqhess-checkpoint", "not a checkpoint file");
    require(j.at("version").get<int>() == 1, "unsupported checkpoint version");
    Checkpoint c;
    c.config = model_config_from_json(j.at("config"));
    c.params = ModelParams::zeros(c.config);
    const auto expected = c.params.layout();
    const Json& layout = j.at("layout");
    require(layout.is_array() && layout.size() == expected.size(), "checkpoint layout does not match the config");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const Json& t = layout[i];
      require(t.at("name").get<std::string>() == expected[i].name &&
                  t.at("rows").get<Eigen::Index>() == expected[i].rows &&
                  t.at("cols").get<Eigen::Index>() == expected[i].cols &&
                  t.at("offset").get<std::size_t>() == expected[i].offset,
              fmt::format("checkpoint tensor {} does not match the config", i));
    }
    const auto flat = j.at("params").get<std::vector<double>>();
    require(flat.size() == c.params.size(), "checkpoint parameter count does not match the layout");
    c.params.unflatten(flat);
    c.params.output_scale = j.at("output_scale").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const std::string hash = j.at("dataset_hash").get<std::string>();
    const auto [ptr, ec] = std::from_chars(hash.data(), hash.data() + hash.size(), c.dataset_hash, 16);
    require(ec == std::errc() && ptr == hash.data() + hash.size(), "malformed dataset hash");
    c.final_train_loss = j.at("final_losses").at("train").get<double>();
    c.final_validation_loss = j.at("final_losses").at("validation").get<double>();
    return c;
  } catch (const Json::exception& e) {
    throw InvalidInput(fmt::format("checkpoint: {}", e.what()));
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_text_file(path, checkpoint_to_json(c).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_json(Json::parse(read_text_file(path)));
  } catch (const Json::parse_error& e) {
    throw InvalidInput(fmt::format("checkpoint '{}': {}", path.string(), e.what()));
  }
}

void RunConfig::validate() const {
  if (potential) potential->validate();
  model.validate();
  train.validate();
  loss.validate();
  require(!methods.empty(), "at least one method is required");
  const HessianSource source = HessianSource::parse(hessian);
  bool model_needed = source.needs_model();
  for (const auto& m : methods) {
    const auto colon = m.find(':');
    const Method method = parse_method(m.substr(0, colon));
    if (colon == std::string::npos) continue;
    require(method == Method::rfo, fmt::format("method '{}' takes no Hessian source", m));
    model_needed = model_needed || HessianSource::parse(m.substr(colon + 1)).needs_model();
  }
  criteria_preset(criteria);
  require(n_seeds >= 1, "n_seeds must be at least 1");
  require(noise >= 0.0, "noise must be non-negative");
  require(max_steps >= 0, "max_steps must be non-negative");
  require(fd_step > 0.0, "fd_step must be positive");
  require(validation_fraction >= 0.0 && validation_fraction < 1.0, "validation_fraction must lie in [0, 1)");
  require(reference_atoms >= 1, "reference atom count must be positive");
  require(irc_step > 0.0 && irc_max_steps >= 0 && irc_displacement >= 0.0, "invalid IRC settings");
  require(bench_repeats >= 1, "bench repeats must be positive");
  for (int n : bench_sizes) require(n >= 2, "bench sizes must be at least 2");
  require(!(model_needed && !checkpoint), "a model-backed Hessian source needs a checkpoint");
  require(!(start && geometry), "give either a start point or a geometry file, not both");
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  ObjectReader r(j, "");
  if (const Json* p = r.child("potential")) {
    PotentialSpec s;
    ObjectReader pr(*p, "potential");
    read_potential(pr, s);
    pr.finish();
    c.potential = s;
  }
  r.read("checkpoint", c.checkpoint);
  r.read("geometry", c.geometry);
  r.read("start", c.start);
  r.read("hessian_file", c.hessian_file);
  r.read("dataset", c.dataset);
  r.read("validation_dataset", c.validation_dataset);
  if (const Json* ref = r.child("reference")) {
    ObjectReader rr(*ref, "reference");
    rr.read("atoms", c.reference_atoms);
    rr.read("bond", c.reference_bond);
    rr.read("element", c.reference_element);
    rr.finish();
  }
  if (const Json* d = r.child("data")) {
    ObjectReader dr(*d, "data");
    dr.read("n_samples", c.data.n_samples);
    dr.read("noise", c.data.noise);
    dr.read("min_pair_distance", c.data.min_pair_distance);
    dr.read("seed", c.data.seed);
    dr.finish();
  }
  r.read("validation_fraction", c.validation_fraction);
  if (const Json* m = r.child("model")) {
    ObjectReader mr(*m, "model");
    read_model(mr, c.model);
    mr.finish();
  }
  if (const Json* t = r.child("train")) {
    ObjectReader tr(*t, "train");
    read_train(tr, c.train);
    tr.finish();
  }
  if (const Json* l = r.child("loss")) {
    ObjectReader lr(*l, "loss");
    read_loss(lr, c.loss);
    lr.finish();
  }
  if (const Json* o = r.child("optimizer")) {
    ObjectReader orr(*o, "optimizer");
    orr.read("methods", c.methods);
    orr.read("hessian", c.hessian);
    orr.read("criteria", c.criteria);
    orr.read("max_steps", c.max_steps);
    orr.read("fd_step", c.fd_step);
    orr.finish();
  }
  r.read("seed", c.seed);
  r.read("n_seeds", c.n_seeds);
  r.read("noise", c.noise);
  if (const Json* i = r.child("irc")) {
    ObjectReader ir(*i, "irc");
    ir.read("step", c.irc_step);
    ir.read("max_steps", c.irc_max_steps);
    ir.read("displacement", c.irc_displacement);
    ir.read("gradient_rms", c.irc_gradient_rms);
    ir.finish();
  }
  if (const Json* b = r.child("bench")) {
    ObjectReader br(*b, "bench");
    br.read("sizes", c.bench_sizes);
    br.read("repeats", c.bench_repeats);
    br.finish();
  }
  r.read("output", c.output);
  r.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return run_config_from_json(Json::parse(read_text_file(path), nullptr, true, true));
  } catch (const Json::parse_error& e) {
    throw InvalidInput(fmt::format("config '{}': {}", path.string(), e.what()));
  }
}

}  // namespace eqhess
