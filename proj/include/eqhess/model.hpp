#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eqhess/irreps.hpp"
#include "eqhess/molecule.hpp"

namespace eqhess {

struct ModelConfig {
  int l_max = 2;
  int channels = 8;
  int layers = 2;
  double cutoff = 6.0;  // Angstrom
  int radial_basis = 16;
  int radial_hidden = 16;
  int head_layers = 1;
  int embedding_dim = 16;
  /// Neighbour sums are divided by this constant.
  double avg_neighbors = 4.0;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Gaussian basis -> silu hidden layer -> one weight per (path, channel),
/// scaled by a cosine envelope that vanishes with zero slope at the cutoff.
struct RadialNet {
  Eigen::MatrixXd w1;  // hidden x basis
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // weights x hidden
  Eigen::VectorXd b2;
};

struct InteractionParams {
  RadialNet radial;
  /// Per degree, channels x 2*channels. Row-major so a row is one output channel.
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mix;
};

struct ModelParams {
  Eigen::MatrixXd species;  // max_atomic_number x embedding_dim
  Eigen::MatrixXd embed;    // channels x embedding_dim
  std::vector<InteractionParams> layers;
  Eigen::VectorXd energy_weights;  // channels
  Eigen::VectorXd energy_bias;     // 1
  Eigen::VectorXd force_weights;   // channels
  std::vector<InteractionParams> head_layers;
  RadialNet pair_radial;
  Eigen::MatrixXd pair_projection;  // 3 x 2*channels, row = output degree
  Eigen::MatrixXd self_projection;  // 3 x channels
  /// Fixed output multiplier (target normalisation); not a learnable parameter.
  double output_scale = 1.0;

  struct Tensor {
    std::string name;
    Eigen::Index rows, cols;
    std::size_t offset;
  };

  /// All-zero parameters of the right shapes.
  static ModelParams zeros(const ModelConfig& cfg);
  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);

  std::size_t size() const;
  std::vector<Tensor> layout() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  /// Calls f(name, matrix) for every learnable tensor in a fixed order.
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

 private:
  template <class Self, class F>
  static void visit(Self& p, F& f);
};

/// Per-edge geometric inputs shared by every layer.
struct EdgeBasis {
  std::vector<double> rbf;
  double envelope = 0.0;
  std::vector<double> sh;  // sqrt(4 pi) Y_l(r_hat), l = 0..l_max
};

EdgeBasis edge_basis(const ModelConfig& cfg, const Eigen::Vector3d& displacement);
double cutoff_envelope(double distance, double cutoff);

/// Radial weights for one distance; throws InvalidInput when d > cutoff.
std::vector<double> radial_weights(const ModelConfig& cfg, const RadialNet& net, double distance);

struct HessianBlock {
  int row_atom, col_atom;
  Eigen::Matrix3d block;
};

/// Places blocks at (3I, 3J) and returns H' + H'^T.
Eigen::MatrixXd assemble_hessian(const std::vector<HessianBlock>& blocks, int n_atoms);

struct PairFeature {
  int source, target;
  IrrepsTensor feature;
};

class HessianModel {
 public:
  explicit HessianModel(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  const IrrepsLayout& node_layout() const { return node_layout_; }
  const IrrepsLayout& pair_layout() const { return pair_layout_; }
  const TensorProduct& message_product() const { return tp_; }

  struct Output {
    std::vector<IrrepsTensor> node_features;
    double energy = 0.0;
    Positions forces;
  };

  Output forward(const Molecule& mol, const ModelParams& params) const;

  /// Message from neighbour j into atom i across displacement r = r_j - r_i.
  IrrepsTensor message(const IrrepsTensor& h_i, const IrrepsTensor& h_j,
                       const Eigen::Vector3d& r, const InteractionParams& layer) const;

  std::vector<IrrepsTensor> head_refine(const std::vector<IrrepsTensor>& nodes, const Graph& graph,
                                        const ModelParams& params) const;
  std::vector<PairFeature> pair_features(const std::vector<IrrepsTensor>& nodes, const Graph& graph,
                                         const ModelParams& params) const;
  /// Pair feature -> 1x0e+1x1e+1x2e through the per-degree channel projection.
  IrrepsTensor project_irreps(const IrrepsTensor& pair, const ModelParams& params) const;
  Eigen::Matrix3d pair_block(const IrrepsTensor& projected) const;
  Eigen::Matrix3d diagonal_block(const IrrepsTensor& node, const ModelParams& params) const;

  Eigen::MatrixXd predict_hessian(const Molecule& mol, const ModelParams& params) const;

  /// Reverse mode: returns d<dH, H(params)>/dparams and optionally the Hessian.
  ModelParams hessian_vjp(const Molecule& mol, const ModelParams& params,
                          const Eigen::MatrixXd& d_hessian,
                          Eigen::MatrixXd* hessian = nullptr) const;

 private:
  struct LayerTape;
  struct Tape;

  std::vector<IrrepsTensor> embed(const Molecule& mol, const ModelParams& params) const;
  void interaction(const InteractionParams& layer, const Graph& graph,
                   const std::vector<EdgeBasis>& basis, std::vector<IrrepsTensor>& nodes,
                   LayerTape* tape) const;
  void interaction_backward(const InteractionParams& layer, InteractionParams& grad,
                            const Graph& graph, const std::vector<EdgeBasis>& basis,
                            const LayerTape& tape, std::vector<IrrepsTensor>& d_nodes) const;
  void concat(const IrrepsTensor& a, const IrrepsTensor& b, std::span<double> out) const;
  Eigen::MatrixXd hessian_forward(const Molecule& mol, const ModelParams& params, Tape* tape) const;

  ModelConfig cfg_;
  IrrepsLayout node_layout_;
  IrrepsLayout pair_layout_;
  IrrepsLayout sh_layout_;
  TensorProduct tp_;
};

template <class Self, class F>
void ModelParams::visit(Self& p, F& f) {
  auto radial = [&f](const std::string& prefix, auto& net) {
    f(prefix + ".w1", net.w1);
    f(prefix + ".b1", net.b1);
    f(prefix + ".w2", net.w2);
    f(prefix + ".b2", net.b2);
  };
  auto interaction = [&](const std::string& prefix, auto& layer) {
    radial(prefix + ".radial", layer.radial);
    for (std::size_t l = 0; l < layer.mix.size(); ++l) f(prefix + ".mix" + std::to_string(l), layer.mix[l]);
  };
  f(std::string("species"), p.species);
  f(std::string("embed"), p.embed);
  for (std::size_t t = 0; t < p.layers.size(); ++t) interaction("layer" + std::to_string(t), p.layers[t]);
  f(std::string("energy.w"), p.energy_weights);
  f(std::string("energy.b"), p.energy_bias);
  f(std::string("force.w"), p.force_weights);
  for (std::size_t t = 0; t < p.head_layers.size(); ++t)
    interaction("head" + std::to_string(t), p.head_layers[t]);
  radial(std::string("pair.radial"), p.pair_radial);
  f(std::string("pair.projection"), p.pair_projection);
  f(std::string("self.projection"), p.self_projection);
}

}  // namespace eqhess
