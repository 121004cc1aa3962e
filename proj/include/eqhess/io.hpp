#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eqhess/losses.hpp"
#include "eqhess/model.hpp"
#include "eqhess/potentials.hpp"
#include "eqhess/sample.hpp"
#include "eqhess/training.hpp"

namespace eqhess {

using Json = nlohmann::json;

struct XyzFrame {
  Molecule molecule;
  std::string comment;
};

/// Standard XYZ, frames concatenated. Errors carry the 1-based line number.
std::vector<XyzFrame> parse_xyz(std::string_view text);
std::vector<Molecule> parse_xyz_molecules(std::string_view text);
std::string format_xyz(const Molecule& mol, std::string_view comment = {});

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);

inline constexpr std::string_view hessian_units = "eV/Angstrom^2";

/// {"n_atoms", "units", "matrix"}; matrix as a list of rows.
Json hessian_to_json(const Eigen::MatrixXd& hessian);
Eigen::MatrixXd hessian_from_json(const Json& j);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// One dataset line: {"z", "pos", "energy", "forces", "hessian"}.
Json sample_to_json(const Sample& s);
Sample sample_from_json(const Json& j);
std::string format_dataset(const std::vector<Sample>& samples);
std::vector<Sample> parse_dataset(std::string_view jsonl);

/// FNV-1a over atomic numbers and the raw bytes of every stored double.
std::uint64_t dataset_hash(const std::vector<Sample>& samples);

Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j);
Json to_json(const LossConfig& c);
LossConfig loss_config_from_json(const Json& j);
Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);
Json to_json(const PotentialSpec& s);
PotentialSpec potential_spec_from_json(const Json& j);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::uint64_t seed = 0;
  std::uint64_t dataset_hash = 0;
  double final_train_loss = 0.0;
  double final_validation_loss = 0.0;
};

Json checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const Json& j);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Every key a command may read from the configuration file.
struct RunConfig {
  std::optional<PotentialSpec> potential;
  std::optional<std::string> checkpoint;
  std::optional<std::string> geometry;  // XYZ path
  std::optional<std::vector<double>> start;  // abstract-surface coordinates
  std::optional<std::string> hessian_file;
  std::optional<std::string> dataset;
  std::optional<std::string> validation_dataset;

  int reference_atoms = 4;
  std::optional<double> reference_bond;
  int reference_element = 18;

  DatasetSpec data;
  double validation_fraction = 0.2;
  ModelConfig model;
  TrainConfig train;
  LossConfig loss;

  std::vector<std::string> methods = {"rfo"};
  std::string hessian = "oracle";
  std::string criteria = "default";
  std::uint64_t seed = 0;
  int n_seeds = 1;
  double noise = 0.0;
  int max_steps = 150;
  double fd_step = 1e-3;

  double irc_step = 0.05;
  int irc_max_steps = 300;
  double irc_displacement = 0.05;
  std::optional<double> irc_gradient_rms;

  std::vector<int> bench_sizes = {5, 10, 20, 30};
  int bench_repeats = 5;

  std::string output = "out";

  /// Cross-field checks: the Hessian source must be resolvable.
  void validate() const;
};

/// Unknown keys at any level are rejected with their dotted path.
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace eqhess
