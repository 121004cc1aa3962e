#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

// SO(3) irreducible-representation algebra.
//
// Conventions (fixed for the whole library):
//  * real spherical harmonics, L2-orthonormal on the unit sphere, no
//    Condon-Shortley phase, components ordered m = -l..l;
//  * for l = 1 the components are proportional to (y, z, x);
//  * only even-parity irreps are modelled (SO(3), not O(3));
//  * a block of `c` channels of degree l is stored m-major, channels
//    contiguous: element (m, ch) sits at offset + (m + l) * c + ch.
namespace eqhess {

struct IrrepBlock {
  int degree = 0;
  int channels = 1;

  int dim() const { return channels * (2 * degree + 1); }
  bool operator==(const IrrepBlock&) const = default;
};

class IrrepsLayout {
 public:
  IrrepsLayout() = default;
  explicit IrrepsLayout(std::vector<IrrepBlock> blocks);

  /// `channels` copies of every degree 0..l_max.
  static IrrepsLayout uniform(int l_max, int channels);

  const std::vector<IrrepBlock>& blocks() const { return blocks_; }
  const IrrepBlock& block(std::size_t b) const { return blocks_[b]; }
  std::size_t num_blocks() const { return blocks_.size(); }
  int total_dim() const { return total_dim_; }
  int offset(std::size_t b) const { return offsets_[b]; }
  /// Index of the first block with the given degree, or -1.
  int find_degree(int degree) const;
  int max_degree() const;
  std::string to_string() const;

  bool operator==(const IrrepsLayout& other) const { return blocks_ == other.blocks_; }

 private:
  std::vector<IrrepBlock> blocks_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
};

class IrrepsTensor {
 public:
  IrrepsTensor() = default;
  explicit IrrepsTensor(IrrepsLayout layout);
  IrrepsTensor(IrrepsLayout layout, std::vector<double> data);

  const IrrepsLayout& layout() const { return layout_; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> block(std::size_t b);
  std::span<const double> block(std::size_t b) const;
  /// Channels of block b at magnetic number m (-l <= m <= l).
  std::span<double> row(std::size_t b, int m);
  std::span<const double> row(std::size_t b, int m) const;
  double& at(std::size_t b, int m, int channel);
  double at(std::size_t b, int m, int channel) const;

 private:
  IrrepsLayout layout_;
  std::vector<double> data_;
};

/// Proper rotation; construction checks orthonormality and det = +1 to 1e-12.
class Rotation {
 public:
  explicit Rotation(const Eigen::Matrix3d& matrix);

  static Rotation identity() { return Rotation(Eigen::Matrix3d::Identity()); }
  static Rotation from_axis_angle(const Eigen::Vector3d& axis, double angle);
  /// Haar-uniform random rotation.
  template <class Rng>
  static Rotation random(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
    q.normalize();
    return Rotation(q.toRotationMatrix());
  }

  const Eigen::Matrix3d& matrix() const { return matrix_; }
  Rotation operator*(const Rotation& other) const { return Rotation(matrix_ * other.matrix_); }

 private:
  Eigen::Matrix3d matrix_;
};

/// Highest degree for which Clebsch-Gordan tables and Wigner-D matrices exist.
inline constexpr int max_supported_degree = 6;

/// Real spherical harmonics Y_l(u), length 2l+1. Requires |u| = 1 within 1e-9.
Eigen::VectorXd real_sph_harm(int l, const Eigen::Vector3d& u);

/// Change of basis taking Cartesian (x, y, z) components to l = 1 real-SH
/// components (m = -1, 0, 1).
const Eigen::Matrix3d& cartesian_to_sh();

/// Wigner-D matrix of degree l in the real-SH basis: Y_l(R u) = D Y_l(u).
Eigen::MatrixXd wigner_d(int l, const Rotation& rotation);

/// Real-basis Clebsch-Gordan coefficients C[m1][m2][m3], indices offset by l.
class CGTensor {
 public:
  CGTensor(int l1, int l2, int l3, std::vector<double> coeffs);

  int l1() const { return l1_; }
  int l2() const { return l2_; }
  int l3() const { return l3_; }
  double operator()(int i1, int i2, int i3) const {
    return coeffs_[(static_cast<std::size_t>(i1) * (2 * l2_ + 1) + i2) * (2 * l3_ + 1) + i3];
  }
  std::span<const double> coeffs() const { return coeffs_; }
  bool is_zero() const;

 private:
  int l1_, l2_, l3_;
  std::vector<double> coeffs_;
};

/// Cached coefficients; zero tensor outside the triangle rule.
/// Throws InvalidInput for degrees above max_supported_degree.
const CGTensor& clebsch_gordan(int l1, int l2, int l3);

/// Rotates every block of x by the Wigner-D matrix of its degree.
IrrepsTensor rotate_irreps(const IrrepsTensor& x, const Rotation& rotation);

/// One coupling path of a tensor product with its nonzero CG entries.
struct TensorProductPath {
  struct Entry {
    int m1, m2, m3;  // indices 0..2l
    double coeff;
  };
  std::size_t in1_block, in2_block, out_block;
  int l1, l2, l3;
  int channels;
  std::size_t weight_offset;
  std::vector<Entry> entries;
};

/// Channel-wise weighted CG tensor product. Every output block of c channels
/// collects all paths from degree-l1 input-1 blocks with c channels and
/// degree-l2 input-2 blocks with 1 or c channels allowed by the triangle
/// rule. Weights are indexed [path][channel].
class TensorProduct {
 public:
  TensorProduct(IrrepsLayout in1, IrrepsLayout in2, IrrepsLayout out);

  const IrrepsLayout& in1() const { return in1_; }
  const IrrepsLayout& in2() const { return in2_; }
  const IrrepsLayout& out() const { return out_; }
  const std::vector<TensorProductPath>& paths() const { return paths_; }
  std::size_t num_weights() const { return num_weights_; }

  IrrepsTensor apply(const IrrepsTensor& p, const IrrepsTensor& g,
                     std::span<const double> weights) const;
  /// out += p (x) g with the given weights; raw spans in the layouts above.
  void accumulate(std::span<const double> p, std::span<const double> g,
                  std::span<const double> weights, std::span<double> out) const;
  /// Reverse-mode: accumulates d/dp and d/dweights given d/dout. The second
  /// operand is treated as a constant.
  void backward(std::span<const double> p, std::span<const double> g,
                std::span<const double> weights, std::span<const double> dout,
                std::span<double> dp, std::span<double> dweights) const;

 private:
  IrrepsLayout in1_, in2_, out_;
  std::vector<TensorProductPath> paths_;
  std::size_t num_weights_ = 0;
};

/// Free-function form: builds the product for (p.layout, g.layout, out_layout).
IrrepsTensor tensor_product(const IrrepsTensor& p, const IrrepsTensor& g,
                            const IrrepsLayout& out_layout, std::span<const double> weights);

/// 1x0e + 1x1e + 1x2e.
const IrrepsLayout& cartesian_rank2_layout();

/// Assembles a Cartesian 3x3 tensor from its l = 0, 1, 2 components through
/// the (1, 1, l) CG coefficients. Requires exactly cartesian_rank2_layout().
Eigen::Matrix3d tensor_expand_3x3(const IrrepsTensor& f);
Eigen::Matrix3d tensor_expand_3x3(std::span<const double> f9);
/// Adjoint of the expansion: df9 += d<M, dM>/df.
void tensor_expand_3x3_adjoint(const Eigen::Matrix3d& dm, std::span<double> df9);

}  // namespace eqhess
