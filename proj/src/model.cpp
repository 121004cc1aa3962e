#include "eqhess/model.hpp"

#include <array>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <random>

#include "eqhess/elements.hpp"
#include "eqhess/error.hpp"
#include "eqhess/kernels.hpp"

namespace eqhess {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double silu(double x) { return x * sigmoid(x); }
double silu_grad(double x) {
  const double s = sigmoid(x);
  return s + x * s * (1.0 - s);
}

struct RadialTrace {
  Eigen::VectorXd pre;
  Eigen::VectorXd hidden;
};

void radial_forward(const RadialNet& net, const EdgeBasis& eb, std::vector<double>& weights,
                    RadialTrace* trace) {
  const Eigen::Map<const Eigen::VectorXd> rbf(eb.rbf.data(), static_cast<Eigen::Index>(eb.rbf.size()));
  Eigen::VectorXd pre = net.w1 * rbf + net.b1;
  Eigen::VectorXd hidden = pre.unaryExpr([](double x) { return silu(x); });
  Eigen::VectorXd out = eb.envelope * (net.w2 * hidden + net.b2);
  weights.assign(out.data(), out.data() + out.size());
  if (trace) {
    trace->pre = std::move(pre);
    trace->hidden = std::move(hidden);
  }
}

void radial_backward(const RadialNet& net, const EdgeBasis& eb, const RadialTrace& trace,
                     std::span<const double> d_weights, RadialNet& grad) {
  const Eigen::Map<const Eigen::VectorXd> rbf(eb.rbf.data(), static_cast<Eigen::Index>(eb.rbf.size()));
  const Eigen::VectorXd dout =
      eb.envelope * Eigen::Map<const Eigen::VectorXd>(d_weights.data(),
                                                      static_cast<Eigen::Index>(d_weights.size()));
  grad.w2.noalias() += dout * trace.hidden.transpose();
  grad.b2 += dout;
  Eigen::VectorXd dpre = net.w2.transpose() * dout;
  for (Eigen::Index i = 0; i < dpre.size(); ++i) dpre(i) *= silu_grad(trace.pre(i));
  grad.w1.noalias() += dpre * rbf.transpose();
  grad.b1 += dpre;
}

template <class M>
void fill_normal(M& m, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> n(0.0, stddev);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
}

RadialNet zero_radial(const ModelConfig& cfg, std::size_t n_weights) {
  const auto w = static_cast<Eigen::Index>(n_weights);
  return {Eigen::MatrixXd::Zero(cfg.radial_hidden, cfg.radial_basis),
          Eigen::VectorXd::Zero(cfg.radial_hidden), Eigen::MatrixXd::Zero(w, cfg.radial_hidden),
          Eigen::VectorXd::Zero(w)};
}

InteractionParams zero_interaction(const ModelConfig& cfg, std::size_t n_weights) {
  InteractionParams p{zero_radial(cfg, n_weights), {}};
  for (int l = 0; l <= cfg.l_max; ++l) p.mix.push_back(RowMatrix::Zero(cfg.channels, 2 * cfg.channels));
  return p;
}

IrrepsLayout sh_layout_for(int l_max) {
  std::vector<IrrepBlock> blocks;
  for (int l = 0; l <= l_max; ++l) blocks.push_back({l, 1});
  return IrrepsLayout(std::move(blocks));
}

std::size_t message_weight_count(const ModelConfig& cfg) {
  return TensorProduct(IrrepsLayout::uniform(cfg.l_max, 2 * cfg.channels), sh_layout_for(cfg.l_max),
                       IrrepsLayout::uniform(cfg.l_max, 2 * cfg.channels))
      .num_weights();
}

}  // namespace

// ------------------------------------------------------------ configuration

void ModelConfig::validate() const {
  require(l_max >= 2, "l_max must be at least 2 to express rank-2 tensors");
  require(l_max <= max_supported_degree, fmt::format("l_max above {} is unsupported", max_supported_degree));
  require(channels >= 1, "channels must be positive");
  require(layers >= 0, "layers must be non-negative");
  require(head_layers >= 0, "head_layers must be non-negative");
  require(cutoff > 0.0 && std::isfinite(cutoff), "cutoff must be positive");
  require(radial_basis >= 2, "radial_basis must be at least 2");
  require(radial_hidden >= 1, "radial_hidden must be positive");
  require(embedding_dim >= 1, "embedding_dim must be positive");
  require(avg_neighbors > 0.0, "avg_neighbors must be positive");
}

// --------------------------------------------------------------- parameters

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t n_weights = message_weight_count(cfg);
  ModelParams p;
  p.species = Eigen::MatrixXd::Zero(max_atomic_number, cfg.embedding_dim);
  p.embed = Eigen::MatrixXd::Zero(cfg.channels, cfg.embedding_dim);
  for (int t = 0; t < cfg.layers; ++t) p.layers.push_back(zero_interaction(cfg, n_weights));
  p.energy_weights = Eigen::VectorXd::Zero(cfg.channels);
  p.energy_bias = Eigen::VectorXd::Zero(1);
  p.force_weights = Eigen::VectorXd::Zero(cfg.channels);
  for (int t = 0; t < cfg.head_layers; ++t) p.head_layers.push_back(zero_interaction(cfg, n_weights));
  p.pair_radial = zero_radial(cfg, n_weights);
  p.pair_projection = Eigen::MatrixXd::Zero(3, 2 * cfg.channels);
  p.self_projection = Eigen::MatrixXd::Zero(3, cfg.channels);
  return p;
}

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p = zeros(cfg);
  std::mt19937_64 rng(seed);
  auto init_radial = [&](RadialNet& net) {
    fill_normal(net.w1, rng, 1.0 / std::sqrt(static_cast<double>(net.w1.cols())));
    fill_normal(net.w2, rng, 1.0 / std::sqrt(static_cast<double>(net.w2.cols())));
    net.b2.setOnes();
  };
  auto init_interaction = [&](InteractionParams& layer) {
    init_radial(layer.radial);
    for (auto& m : layer.mix) fill_normal(m, rng, 1.0 / std::sqrt(static_cast<double>(m.cols())));
  };
  fill_normal(p.species, rng, 1.0);
  fill_normal(p.embed, rng, 1.0 / std::sqrt(static_cast<double>(cfg.embedding_dim)));
  for (auto& layer : p.layers) init_interaction(layer);
  fill_normal(p.energy_weights, rng, 1.0 / std::sqrt(static_cast<double>(cfg.channels)));
  fill_normal(p.force_weights, rng, 1.0 / std::sqrt(static_cast<double>(cfg.channels)));
  for (auto& layer : p.head_layers) init_interaction(layer);
  init_radial(p.pair_radial);
  fill_normal(p.pair_projection, rng, 1.0 / std::sqrt(2.0 * cfg.channels));
  fill_normal(p.self_projection, rng, 1.0 / std::sqrt(static_cast<double>(cfg.channels)));
  return p;
}

std::size_t ModelParams::size() const {
  std::size_t n = 0;
  for_each([&n](const std::string&, const auto& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

std::vector<ModelParams::Tensor> ModelParams::layout() const {
  std::vector<Tensor> out;
  std::size_t offset = 0;
  for_each([&](const std::string& name, const auto& m) {
    out.push_back({name, m.rows(), m.cols(), offset});
    offset += static_cast<std::size_t>(m.size());
  });
  return out;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  // Column-major matrices are flattened row by row so the layout is storage independent.
  for_each([&flat](const std::string&, const auto& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  });
  return flat;
}

void ModelParams::unflatten(std::span<const double> flat) {
  require(flat.size() == size(),
          fmt::format("parameter vector has {} entries, model expects {}", flat.size(), size()));
  std::size_t i = 0;
  for_each([&](const std::string&, auto& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat[i++];
  });
}

// ------------------------------------------------------------- edge inputs

double cutoff_envelope(double distance, double cutoff) {
  if (distance >= cutoff) return 0.0;
  // (cos(pi d / rc) + 1) / 2 written as a square to keep precision near the cutoff.
  const double c = std::cos(0.5 * std::numbers::pi * distance / cutoff);
  return c * c;
}

EdgeBasis edge_basis(const ModelConfig& cfg, const Eigen::Vector3d& displacement) {
  const double d = displacement.norm();
  require(d > 0.0, "zero-length edge");
  require(d <= cfg.cutoff, fmt::format("edge length {} exceeds cutoff {}", d, cfg.cutoff));
  EdgeBasis eb;
  const double spacing = cfg.cutoff / (cfg.radial_basis - 1);
  eb.rbf.resize(static_cast<std::size_t>(cfg.radial_basis));
  for (int k = 0; k < cfg.radial_basis; ++k) {
    const double x = (d - k * spacing) / spacing;
    eb.rbf[static_cast<std::size_t>(k)] = std::exp(-x * x);
  }
  eb.envelope = cutoff_envelope(d, cfg.cutoff);
  const Eigen::Vector3d u = displacement / d;
  const double norm = std::sqrt(4.0 * std::numbers::pi);
  for (int l = 0; l <= cfg.l_max; ++l) {
    const Eigen::VectorXd y = real_sph_harm(l, u);
    for (Eigen::Index m = 0; m < y.size(); ++m) eb.sh.push_back(norm * y(m));
  }
  return eb;
}

std::vector<double> radial_weights(const ModelConfig& cfg, const RadialNet& net, double distance) {
  require(distance > 0.0, "radial weights need a positive distance");
  require(distance <= cfg.cutoff, fmt::format("distance {} exceeds cutoff {}", distance, cfg.cutoff));
  const EdgeBasis eb = edge_basis(cfg, Eigen::Vector3d(0.0, 0.0, distance));
  std::vector<double> w;
  radial_forward(net, eb, w, nullptr);
  return w;
}

// ---------------------------------------------------------------- assembly

Eigen::MatrixXd assemble_hessian(const std::vector<HessianBlock>& blocks, int n_atoms) {
  require(n_atoms >= 1, "Hessian needs at least one atom");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 * n_atoms, 3 * n_atoms);
  for (const auto& b : blocks) {
    require(b.row_atom >= 0 && b.row_atom < n_atoms && b.col_atom >= 0 && b.col_atom < n_atoms,
            "Hessian block index out of range");
    h.block<3, 3>(3 * b.row_atom, 3 * b.col_atom) = b.block;
  }
  return h + h.transpose();
}

// -------------------------------------------------------------------- model

struct HessianModel::LayerTape {
  std::vector<IrrepsTensor> input;
  std::vector<std::vector<double>> aggregate;  // pair layout, already normalised
  std::vector<std::vector<double>> update;     // node layout, before the gate
  std::vector<RadialTrace> radial;
  std::vector<std::vector<double>> weights;
};

struct HessianModel::Tape {
  Graph graph;
  std::vector<EdgeBasis> basis;
  std::vector<LayerTape> backbone;
  std::vector<LayerTape> head;
  std::vector<IrrepsTensor> refined;
  std::vector<RadialTrace> pair_radial;
  std::vector<std::vector<double>> pair_weights;
  std::vector<std::vector<double>> pair_out;
};

HessianModel::HessianModel(ModelConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      node_layout_(IrrepsLayout::uniform(cfg_.l_max, cfg_.channels)),
      pair_layout_(IrrepsLayout::uniform(cfg_.l_max, 2 * cfg_.channels)),
      sh_layout_(sh_layout_for(cfg_.l_max)),
      tp_(pair_layout_, sh_layout_, pair_layout_) {}

void HessianModel::concat(const IrrepsTensor& a, const IrrepsTensor& b, std::span<double> out) const {
  const int c = cfg_.channels;
  std::size_t k = 0;
  for (std::size_t blk = 0; blk < node_layout_.num_blocks(); ++blk) {
    const int l = node_layout_.block(blk).degree;
    for (int m = -l; m <= l; ++m) {
      const auto ra = a.row(blk, m);
      const auto rb = b.row(blk, m);
      std::copy(ra.begin(), ra.end(), out.begin() + static_cast<std::ptrdiff_t>(k));
      std::copy(rb.begin(), rb.end(), out.begin() + static_cast<std::ptrdiff_t>(k + c));
      k += 2 * static_cast<std::size_t>(c);
    }
  }
}

std::vector<IrrepsTensor> HessianModel::embed(const Molecule& mol, const ModelParams& params) const {
  std::vector<IrrepsTensor> nodes;
  nodes.reserve(static_cast<std::size_t>(mol.size()));
  for (int i = 0; i < mol.size(); ++i) {
    const int z = mol.atomic_numbers[static_cast<std::size_t>(i)];
    require(z >= 1 && z <= max_atomic_number, fmt::format("unsupported atomic number {}", z));
    IrrepsTensor h(node_layout_);
    Eigen::Map<Eigen::VectorXd>(h.block(0).data(), cfg_.channels) =
        params.embed * params.species.row(z - 1).transpose();
    nodes.push_back(std::move(h));
  }
  return nodes;
}

void HessianModel::interaction(const InteractionParams& layer, const Graph& graph,
                               const std::vector<EdgeBasis>& basis, std::vector<IrrepsTensor>& nodes,
                               LayerTape* tape) const {
  const std::size_t n = nodes.size();
  const int c = cfg_.channels;
  const double inv_norm = 1.0 / cfg_.avg_neighbors;
  std::vector<double> p(static_cast<std::size_t>(pair_layout_.total_dim()));
  std::vector<double> w;
  std::vector<std::vector<double>> aggregate(n, std::vector<double>(p.size(), 0.0));
  RadialTrace trace;
  if (tape) {
    tape->input = nodes;
    tape->radial.resize(graph.edges.size());
    tape->weights.resize(graph.edges.size());
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Edge& edge = graph.edges[e];
    concat(nodes[static_cast<std::size_t>(edge.source)], nodes[static_cast<std::size_t>(edge.target)], p);
    radial_forward(layer.radial, basis[e], w, tape ? &trace : nullptr);
    tp_.accumulate(p, basis[e].sh, w, aggregate[static_cast<std::size_t>(edge.source)]);
    if (tape) {
      tape->radial[e] = std::move(trace);
      tape->weights[e] = w;
    }
  }
  if (tape) {
    tape->update.assign(n, std::vector<double>(static_cast<std::size_t>(node_layout_.total_dim())));
  }
  std::vector<double> u(static_cast<std::size_t>(node_layout_.total_dim()));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : aggregate[i]) x *= inv_norm;
    for (std::size_t blk = 0; blk < node_layout_.num_blocks(); ++blk) {
      const int l = node_layout_.block(blk).degree;
      for (int m = -l; m <= l; ++m) {
        const std::size_t in_off = static_cast<std::size_t>(pair_layout_.offset(blk) + (m + l) * 2 * c);
        const std::size_t out_off = static_cast<std::size_t>(node_layout_.offset(blk) + (m + l) * c);
        Eigen::Map<Eigen::VectorXd>(u.data() + out_off, c).noalias() =
            layer.mix[blk] * Eigen::Map<const Eigen::VectorXd>(aggregate[i].data() + in_off, 2 * c);
      }
    }
    // Gated residual update: silu on scalars, vectors scaled by sigmoid of their channel's scalar.
    auto h = nodes[i].data();
    for (int ch = 0; ch < c; ++ch) h[ch] += silu(u[ch]);
    for (std::size_t blk = 1; blk < node_layout_.num_blocks(); ++blk) {
      const int l = node_layout_.block(blk).degree;
      const int off = node_layout_.offset(blk);
      for (int m = 0; m < 2 * l + 1; ++m)
        for (int ch = 0; ch < c; ++ch) h[off + m * c + ch] += u[off + m * c + ch] * sigmoid(u[ch]);
    }
    if (tape) tape->update[i] = u;
  }
  if (tape) tape->aggregate = std::move(aggregate);
}

void HessianModel::interaction_backward(const InteractionParams& layer, InteractionParams& grad,
                                        const Graph& graph, const std::vector<EdgeBasis>& basis,
                                        const LayerTape& tape,
                                        std::vector<IrrepsTensor>& d_nodes) const {
  const std::size_t n = d_nodes.size();
  const int c = cfg_.channels;
  const double inv_norm = 1.0 / cfg_.avg_neighbors;
  std::vector<std::vector<double>> d_aggregate(n);
  std::vector<double> du(static_cast<std::size_t>(node_layout_.total_dim()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = tape.update[i];
    const auto dh = d_nodes[i].data();
    std::fill(du.begin(), du.end(), 0.0);
    for (int ch = 0; ch < c; ++ch) du[ch] = silu_grad(u[ch]) * dh[ch];
    for (std::size_t blk = 1; blk < node_layout_.num_blocks(); ++blk) {
      const int l = node_layout_.block(blk).degree;
      const int off = node_layout_.offset(blk);
      for (int m = 0; m < 2 * l + 1; ++m)
        for (int ch = 0; ch < c; ++ch) {
          const int k = off + m * c + ch;
          const double s = sigmoid(u[ch]);
          du[k] = s * dh[k];
          du[ch] += u[k] * s * (1.0 - s) * dh[k];
        }
    }
    auto& da = d_aggregate[i];
    da.assign(static_cast<std::size_t>(pair_layout_.total_dim()), 0.0);
    for (std::size_t blk = 0; blk < node_layout_.num_blocks(); ++blk) {
      const int l = node_layout_.block(blk).degree;
      for (int m = -l; m <= l; ++m) {
        const std::size_t in_off = static_cast<std::size_t>(pair_layout_.offset(blk) + (m + l) * 2 * c);
        const std::size_t out_off = static_cast<std::size_t>(node_layout_.offset(blk) + (m + l) * c);
        const Eigen::Map<const Eigen::VectorXd> du_row(du.data() + out_off, c);
        const Eigen::Map<const Eigen::VectorXd> a_row(tape.aggregate[i].data() + in_off, 2 * c);
        grad.mix[blk].noalias() += du_row * a_row.transpose();
        Eigen::Map<Eigen::VectorXd>(da.data() + in_off, 2 * c).noalias() =
            inv_norm * (layer.mix[blk].transpose() * du_row);
      }
    }
  }
  std::vector<double> p(static_cast<std::size_t>(pair_layout_.total_dim()));
  std::vector<double> dp(p.size());
  std::vector<double> dw(tp_.num_weights());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Edge& edge = graph.edges[e];
    const auto src = static_cast<std::size_t>(edge.source);
    const auto tgt = static_cast<std::size_t>(edge.target);
    concat(tape.input[src], tape.input[tgt], p);
    std::fill(dp.begin(), dp.end(), 0.0);
    std::fill(dw.begin(), dw.end(), 0.0);
    tp_.backward(p, basis[e].sh, tape.weights[e], d_aggregate[src], dp, dw);
    radial_backward(layer.radial, basis[e], tape.radial[e], dw, grad.radial);
    std::size_t k = 0;
    for (std::size_t blk = 0; blk < node_layout_.num_blocks(); ++blk) {
      const int l = node_layout_.block(blk).degree;
      for (int m = -l; m <= l; ++m) {
        auto ds = d_nodes[src].row(blk, m);
        auto dt = d_nodes[tgt].row(blk, m);
        for (int ch = 0; ch < c; ++ch) {
          ds[ch] += dp[k + ch];
          dt[ch] += dp[k + c + ch];
        }
        k += 2 * static_cast<std::size_t>(c);
      }
    }
  }
}

HessianModel::Output HessianModel::forward(const Molecule& mol, const ModelParams& params) const {
  const Graph graph = build_graph(mol, cfg_.cutoff);
  std::vector<EdgeBasis> basis;
  for (const auto& e : graph.edges) basis.push_back(edge_basis(cfg_, e.displacement));
  Output out;
  out.node_features = embed(mol, params);
  for (const auto& layer : params.layers) interaction(layer, graph, basis, out.node_features, nullptr);
  const int c = cfg_.channels;
  const Eigen::Matrix3d& b = cartesian_to_sh();
  out.forces = Positions::Zero(mol.size(), 3);
  for (int i = 0; i < mol.size(); ++i) {
    const auto& h = out.node_features[static_cast<std::size_t>(i)];
    out.energy += Eigen::Map<const Eigen::VectorXd>(h.block(0).data(), c).dot(params.energy_weights) +
                  params.energy_bias(0);
    Eigen::Vector3d sh;
    for (int m = -1; m <= 1; ++m)
      sh(m + 1) = Eigen::Map<const Eigen::VectorXd>(h.row(1, m).data(), c).dot(params.force_weights);
    out.forces.row(i) = (b.transpose() * sh).transpose();
  }
  return out;
}

IrrepsTensor HessianModel::message(const IrrepsTensor& h_i, const IrrepsTensor& h_j,
                                   const Eigen::Vector3d& r, const InteractionParams& layer) const {
  require(h_i.layout() == node_layout_ && h_j.layout() == node_layout_,
          "message operands must use the backbone layout");
  const EdgeBasis eb = edge_basis(cfg_, r);
  std::vector<double> p(static_cast<std::size_t>(pair_layout_.total_dim()));
  concat(h_i, h_j, p);
  std::vector<double> w;
  radial_forward(layer.radial, eb, w, nullptr);
  IrrepsTensor out(pair_layout_);
  tp_.accumulate(p, eb.sh, w, out.data());
  return out;
}

std::vector<IrrepsTensor> HessianModel::head_refine(const std::vector<IrrepsTensor>& nodes,
                                                    const Graph& graph,
                                                    const ModelParams& params) const {
  std::vector<EdgeBasis> basis;
  for (const auto& e : graph.edges) basis.push_back(edge_basis(cfg_, e.displacement));
  auto refined = nodes;
  for (const auto& layer : params.head_layers) interaction(layer, graph, basis, refined, nullptr);
  return refined;
}

std::vector<PairFeature> HessianModel::pair_features(const std::vector<IrrepsTensor>& nodes,
                                                     const Graph& graph,
                                                     const ModelParams& params) const {
  std::vector<PairFeature> out;
  out.reserve(graph.edges.size());
  std::vector<double> p(static_cast<std::size_t>(pair_layout_.total_dim()));
  std::vector<double> w;
  for (const auto& e : graph.edges) {
    const EdgeBasis eb = edge_basis(cfg_, e.displacement);
    concat(nodes[static_cast<std::size_t>(e.source)], nodes[static_cast<std::size_t>(e.target)], p);
    radial_forward(params.pair_radial, eb, w, nullptr);
    IrrepsTensor f(pair_layout_);
    tp_.accumulate(p, eb.sh, w, f.data());
    out.push_back({e.source, e.target, std::move(f)});
  }
  return out;
}

IrrepsTensor HessianModel::project_irreps(const IrrepsTensor& pair, const ModelParams& params) const {
  require(pair.layout() == pair_layout_, "pair feature layout mismatch");
  IrrepsTensor out(cartesian_rank2_layout());
  const int c2 = 2 * cfg_.channels;
  for (int l = 0; l <= 2; ++l)
    for (int m = -l; m <= l; ++m)
      out.at(static_cast<std::size_t>(l), m, 0) =
          params.pair_projection.row(l).dot(Eigen::Map<const Eigen::VectorXd>(pair.row(l, m).data(), c2));
  return out;
}

Eigen::Matrix3d HessianModel::pair_block(const IrrepsTensor& projected) const {
  return tensor_expand_3x3(projected);
}

Eigen::Matrix3d HessianModel::diagonal_block(const IrrepsTensor& node, const ModelParams& params) const {
  require(node.layout() == node_layout_, "node feature layout mismatch");
  std::array<double, 9> f{};
  const int c = cfg_.channels;
  for (int l = 0, k = 0; l <= 2; ++l)
    for (int m = -l; m <= l; ++m, ++k)
      f[static_cast<std::size_t>(k)] =
          params.self_projection.row(l).dot(Eigen::Map<const Eigen::VectorXd>(node.row(l, m).data(), c));
  return tensor_expand_3x3(f);
}

Eigen::MatrixXd HessianModel::hessian_forward(const Molecule& mol, const ModelParams& params,
                                              Tape* tape) const {
  require(params.layers.size() == static_cast<std::size_t>(cfg_.layers) &&
              params.head_layers.size() == static_cast<std::size_t>(cfg_.head_layers),
          "parameters do not match the model configuration");
  Graph graph = build_graph(mol, cfg_.cutoff);
  std::vector<EdgeBasis> basis;
  basis.reserve(graph.edges.size());
  for (const auto& e : graph.edges) basis.push_back(edge_basis(cfg_, e.displacement));

  std::vector<IrrepsTensor> nodes = embed(mol, params);
  if (tape) {
    tape->backbone.resize(params.layers.size());
    tape->head.resize(params.head_layers.size());
  }
  for (std::size_t t = 0; t < params.layers.size(); ++t)
    interaction(params.layers[t], graph, basis, nodes, tape ? &tape->backbone[t] : nullptr);
  for (std::size_t t = 0; t < params.head_layers.size(); ++t)
    interaction(params.head_layers[t], graph, basis, nodes, tape ? &tape->head[t] : nullptr);

  std::vector<HessianBlock> blocks;
  blocks.reserve(graph.edges.size() + nodes.size());
  std::vector<double> p(static_cast<std::size_t>(pair_layout_.total_dim()));
  std::vector<double> w;
  RadialTrace trace;
  if (tape) {
    tape->pair_radial.resize(graph.edges.size());
    tape->pair_weights.resize(graph.edges.size());
    tape->pair_out.resize(graph.edges.size());
  }
  IrrepsTensor pair(pair_layout_);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Edge& edge = graph.edges[e];
    concat(nodes[static_cast<std::size_t>(edge.source)], nodes[static_cast<std::size_t>(edge.target)], p);
    radial_forward(params.pair_radial, basis[e], w, tape ? &trace : nullptr);
    std::fill(pair.data().begin(), pair.data().end(), 0.0);
    tp_.accumulate(p, basis[e].sh, w, pair.data());
    blocks.push_back({edge.source, edge.target, pair_block(project_irreps(pair, params))});
    if (tape) {
      tape->pair_radial[e] = std::move(trace);
      tape->pair_weights[e] = w;
      tape->pair_out[e].assign(pair.data().begin(), pair.data().end());
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    blocks.push_back({static_cast<int>(i), static_cast<int>(i), diagonal_block(nodes[i], params)});

  if (tape) {
    tape->refined = nodes;
    tape->basis = std::move(basis);
    tape->graph = std::move(graph);
  }
  return params.output_scale * assemble_hessian(blocks, mol.size());
}

Eigen::MatrixXd HessianModel::predict_hessian(const Molecule& mol, const ModelParams& params) const {
  return hessian_forward(mol, params, nullptr);
}

ModelParams HessianModel::hessian_vjp(const Molecule& mol, const ModelParams& params,
                                      const Eigen::MatrixXd& d_hessian, Eigen::MatrixXd* hessian) const {
  require(d_hessian.rows() == 3 * mol.size() && d_hessian.cols() == 3 * mol.size(),
          "Hessian cotangent has the wrong shape");
  Tape tape;
  Eigen::MatrixXd h = hessian_forward(mol, params, &tape);
  if (hessian) *hessian = std::move(h);

  ModelParams grad = ModelParams::zeros(cfg_);
  const Eigen::MatrixXd d_raw = params.output_scale * (d_hessian + d_hessian.transpose());
  const int c = cfg_.channels;
  const std::size_t n = static_cast<std::size_t>(mol.size());
  std::vector<IrrepsTensor> d_nodes(n, IrrepsTensor(node_layout_));

  std::array<double, 9> df{};
  for (std::size_t i = 0; i < n; ++i) {
    df.fill(0.0);
    tensor_expand_3x3_adjoint(d_raw.block<3, 3>(3 * static_cast<Eigen::Index>(i), 3 * static_cast<Eigen::Index>(i)), df);
    for (int l = 0, k = 0; l <= 2; ++l)
      for (int m = -l; m <= l; ++m, ++k) {
        const auto row = tape.refined[i].row(static_cast<std::size_t>(l), m);
        auto drow = d_nodes[i].row(static_cast<std::size_t>(l), m);
        for (int ch = 0; ch < c; ++ch) {
          grad.self_projection(l, ch) += df[static_cast<std::size_t>(k)] * row[ch];
          drow[ch] += df[static_cast<std::size_t>(k)] * params.self_projection(l, ch);
        }
      }
  }

  std::vector<double> p(static_cast<std::size_t>(pair_layout_.total_dim()));
  std::vector<double> dp(p.size());
  std::vector<double> d_out(p.size());
  std::vector<double> dw(tp_.num_weights());
  const int c2 = 2 * c;
  for (std::size_t e = 0; e < tape.graph.edges.size(); ++e) {
    const Edge& edge = tape.graph.edges[e];
    const auto src = static_cast<std::size_t>(edge.source);
    const auto tgt = static_cast<std::size_t>(edge.target);
    df.fill(0.0);
    tensor_expand_3x3_adjoint(d_raw.block<3, 3>(3 * edge.source, 3 * edge.target), df);
    std::fill(d_out.begin(), d_out.end(), 0.0);
    for (int l = 0, k = 0; l <= 2; ++l)
      for (int m = -l; m <= l; ++m, ++k) {
        const std::size_t off = static_cast<std::size_t>(pair_layout_.offset(static_cast<std::size_t>(l)) + (m + l) * c2);
        for (int ch = 0; ch < c2; ++ch) {
          grad.pair_projection(l, ch) += df[static_cast<std::size_t>(k)] * tape.pair_out[e][off + ch];
          d_out[off + ch] = df[static_cast<std::size_t>(k)] * params.pair_projection(l, ch);
        }
      }
    concat(tape.refined[src], tape.refined[tgt], p);
    std::fill(dp.begin(), dp.end(), 0.0);
    std::fill(dw.begin(), dw.end(), 0.0);
    tp_.backward(p, tape.basis[e].sh, tape.pair_weights[e], d_out, dp, dw);
    radial_backward(params.pair_radial, tape.basis[e], tape.pair_radial[e], dw, grad.pair_radial);
    std::size_t k = 0;
    for (std::size_t blk = 0; blk < node_layout_.num_blocks(); ++blk) {
      const int l = node_layout_.block(blk).degree;
      for (int m = -l; m <= l; ++m) {
        auto ds = d_nodes[src].row(blk, m);
        auto dt = d_nodes[tgt].row(blk, m);
        for (int ch = 0; ch < c; ++ch) {
          ds[ch] += dp[k + ch];
          dt[ch] += dp[k + c + ch];
        }
        k += static_cast<std::size_t>(c2);
      }
    }
  }

  for (std::size_t t = params.head_layers.size(); t-- > 0;)
    interaction_backward(params.head_layers[t], grad.head_layers[t], tape.graph, tape.basis, tape.head[t],
                         d_nodes);
  for (std::size_t t = params.layers.size(); t-- > 0;)
    interaction_backward(params.layers[t], grad.layers[t], tape.graph, tape.basis, tape.backbone[t], d_nodes);

  for (std::size_t i = 0; i < n; ++i) {
    const int z = mol.atomic_numbers[i];
    const Eigen::Map<const Eigen::VectorXd> dh0(d_nodes[i].block(0).data(), c);
    grad.embed.noalias() += dh0 * params.species.row(z - 1);
    grad.species.row(z - 1) += (params.embed.transpose() * dh0).transpose();
  }
  return grad;
}

}  // namespace eqhess
