#include "eqhess/irreps.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <fmt/format.h>
#include <numbers>

#include "eqhess/error.hpp"
#include "eqhess/kernels.hpp"

namespace eqhess {

// ---------------------------------------------------------------- layouts

IrrepsLayout::IrrepsLayout(std::vector<IrrepBlock> blocks) : blocks_(std::move(blocks)) {
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    require(b.degree >= 0, "irreps degree must be non-negative");
    require(b.channels > 0, "irreps channel count must be positive");
    offsets_.push_back(total_dim_);
    total_dim_ += b.dim();
  }
}

IrrepsLayout IrrepsLayout::uniform(int l_max, int channels) {
  std::vector<IrrepBlock> blocks;
  for (int l = 0; l <= l_max; ++l) blocks.push_back({l, channels});
  return IrrepsLayout(std::move(blocks));
}

int IrrepsLayout::find_degree(int degree) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].degree == degree) return static_cast<int>(b);
  }
  return -1;
}

int IrrepsLayout::max_degree() const {
  int l = -1;
  for (const auto& b : blocks_) l = std::max(l, b.degree);
  return l;
}

std::string IrrepsLayout::to_string() const {
  std::string s;
  for (const auto& b : blocks_) {
    if (!s.empty()) s += "+";
    s += fmt::format("{}x{}e", b.channels, b.degree);
  }
  return s;
}

IrrepsTensor::IrrepsTensor(IrrepsLayout layout)
    : layout_(std::move(layout)), data_(static_cast<std::size_t>(layout_.total_dim()), 0.0) {}

IrrepsTensor::IrrepsTensor(IrrepsLayout layout, std::vector<double> data)
    : layout_(std::move(layout)), data_(std::move(data)) {
  require(data_.size() == static_cast<std::size_t>(layout_.total_dim()),
          "irreps data length does not match layout");
}

std::span<double> IrrepsTensor::block(std::size_t b) {
  return std::span<double>(data_).subspan(layout_.offset(b), layout_.block(b).dim());
}

std::span<const double> IrrepsTensor::block(std::size_t b) const {
  return std::span<const double>(data_).subspan(layout_.offset(b), layout_.block(b).dim());
}

std::span<double> IrrepsTensor::row(std::size_t b, int m) {
  const auto& blk = layout_.block(b);
  return block(b).subspan(static_cast<std::size_t>(m + blk.degree) * blk.channels, blk.channels);
}

std::span<const double> IrrepsTensor::row(std::size_t b, int m) const {
  const auto& blk = layout_.block(b);
  return block(b).subspan(static_cast<std::size_t>(m + blk.degree) * blk.channels, blk.channels);
}

double& IrrepsTensor::at(std::size_t b, int m, int channel) { return row(b, m)[channel]; }
double IrrepsTensor::at(std::size_t b, int m, int channel) const { return row(b, m)[channel]; }

// -------------------------------------------------------------- rotations

Rotation::Rotation(const Eigen::Matrix3d& matrix) : matrix_(matrix) {
  const double ortho = (matrix.transpose() * matrix - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  require(ortho < 1e-12, "rotation matrix is not orthonormal");
  require(std::abs(matrix.determinant() - 1.0) < 1e-12, "rotation matrix must have det +1");
}

Rotation Rotation::from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  require(axis.norm() > 0.0, "rotation axis must be nonzero");
  return Rotation(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
}

// ---------------------------------------------------- spherical harmonics

namespace {

double factorial(int n) {
  static const std::array<double, 64> table = [] {
    std::array<double, 64> t{};
    t[0] = 1.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

}  // namespace

Eigen::VectorXd real_sph_harm(int l, const Eigen::Vector3d& u) {
  require(l >= 0, "spherical harmonic degree must be non-negative");
  require(std::abs(u.norm() - 1.0) < 1e-9, "real_sph_harm requires a unit vector");
  const double x = u.x(), y = u.y(), z = u.z();

  // (x + iy)^m = a[m] + i b[m]
  std::vector<double> a(l + 1), b(l + 1);
  a[0] = 1.0;
  b[0] = 0.0;
  for (int m = 0; m < l; ++m) {
    a[m + 1] = a[m] * x - b[m] * y;
    b[m + 1] = a[m] * y + b[m] * x;
  }

  Eigen::VectorXd out(2 * l + 1);
  for (int m = 0; m <= l; ++m) {
    // Associated Legendre P_l^m(z) / sin^m(theta), without Condon-Shortley phase.
    double pmm = 1.0;
    for (int k = 1; k <= m; ++k) pmm *= static_cast<double>(2 * k - 1);
    double p = pmm;
    if (l > m) {
      double p_prev = pmm;
      double p_cur = static_cast<double>(2 * m + 1) * z * pmm;
      for (int ll = m + 2; ll <= l; ++ll) {
        const double next =
            (static_cast<double>(2 * ll - 1) * z * p_cur - static_cast<double>(ll + m - 1) * p_prev) /
            static_cast<double>(ll - m);
        p_prev = p_cur;
        p_cur = next;
      }
      p = p_cur;
    }
    const double norm = std::sqrt(static_cast<double>(2 * l + 1) / (4.0 * std::numbers::pi) *
                                  factorial(l - m) / factorial(l + m));
    if (m == 0) {
      out(l) = norm * p;
    } else {
      out(l + m) = std::numbers::sqrt2 * norm * p * a[m];
      out(l - m) = std::numbers::sqrt2 * norm * p * b[m];
    }
  }
  return out;
}

const Eigen::Matrix3d& cartesian_to_sh() {
  static const Eigen::Matrix3d basis = [] {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(0, 1) = 1.0;  // m = -1 <- y
    m(1, 2) = 1.0;  // m =  0 <- z
    m(2, 0) = 1.0;  // m = +1 <- x
    return m;
  }();
  return basis;
}

// --------------------------------------------------------- Clebsch-Gordan

CGTensor::CGTensor(int l1, int l2, int l3, std::vector<double> coeffs)
    : l1_(l1), l2_(l2), l3_(l3), coeffs_(std::move(coeffs)) {
  require(coeffs_.size() == static_cast<std::size_t>((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1)),
          "CG coefficient array has wrong size");
}

bool CGTensor::is_zero() const {
  for (double c : coeffs_) {
    if (c != 0.0) return false;
  }
  return true;
}

namespace {

// Complex-basis Condon-Shortley coefficient <j1 m1 j2 m2 | j3 m3> (Racah formula).
double complex_cg(int j1, int m1, int j2, int m2, int j3, int m3) {
  if (m1 + m2 != m3) return 0.0;
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  const double pref = std::sqrt(static_cast<double>(2 * j3 + 1) * factorial(j3 + j1 - j2) *
                                factorial(j3 - j1 + j2) * factorial(j1 + j2 - j3) /
                                factorial(j1 + j2 + j3 + 1));
  const double mfac = std::sqrt(factorial(j3 + m3) * factorial(j3 - m3) * factorial(j1 - m1) *
                                factorial(j1 + m1) * factorial(j2 - m2) * factorial(j2 + m2));
  double sum = 0.0;
  for (int k = 0; k <= j1 + j2 + j3; ++k) {
    const int d1 = j1 + j2 - j3 - k;
    const int d2 = j1 - m1 - k;
    const int d3 = j2 + m2 - k;
    const int d4 = j3 - j2 + m1 + k;
    const int d5 = j3 - j1 - m2 + k;
    if (d1 < 0 || d2 < 0 || d3 < 0 || d4 < 0 || d5 < 0) continue;
    const double term = 1.0 / (factorial(k) * factorial(d1) * factorial(d2) * factorial(d3) *
                               factorial(d4) * factorial(d5));
    sum += (k % 2 == 0) ? term : -term;
  }
  return pref * mfac * sum;
}

// Rows: real components m = -l..l; columns: complex components M = -l..l.
Eigen::MatrixXcd complex_to_real(int l) {
  using C = std::complex<double>;
  const double r = 1.0 / std::numbers::sqrt2;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2 * l + 1, 2 * l + 1);
  u(l, l) = 1.0;
  for (int m = 1; m <= l; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    u(l + m, l + m) = sign * r;
    u(l + m, l - m) = r;
    u(l - m, l + m) = C(0.0, -sign * r);
    u(l - m, l - m) = C(0.0, r);
  }
  return u;
}

std::vector<double> real_cg(int l1, int l2, int l3) {
  const int n1 = 2 * l1 + 1, n2 = 2 * l2 + 1, n3 = 2 * l3 + 1;
  std::vector<double> out(static_cast<std::size_t>(n1 * n2 * n3), 0.0);
  if (l3 < std::abs(l1 - l2) || l3 > l1 + l2) return out;

  const Eigen::MatrixXcd u1 = complex_to_real(l1);
  const Eigen::MatrixXcd u2 = complex_to_real(l2);
  const Eigen::MatrixXcd u3 = complex_to_real(l3);
  std::vector<std::complex<double>> c(out.size());
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b)
      for (int d = 0; d < n3; ++d) {
        std::complex<double> acc = 0.0;
        for (int ma = -l1; ma <= l1; ++ma)
          for (int mb = -l2; mb <= l2; ++mb) {
            const int md = ma + mb;
            if (std::abs(md) > l3) continue;
            const double cg = complex_cg(l1, ma, l2, mb, l3, md);
            if (cg == 0.0) continue;
            acc += u3(d, md + l3) * std::conj(u1(a, ma + l1)) * std::conj(u2(b, mb + l2)) * cg;
          }
        c[(static_cast<std::size_t>(a) * n2 + b) * n3 + d] = acc;
      }
  // The real-basis tensor is either purely real or purely imaginary.
  double re = 0.0, im = 0.0;
  for (const auto& v : c) {
    re += std::norm(v.real());
    im += std::norm(v.imag());
  }
  const bool use_real = re >= im;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v = use_real ? c[i].real() : c[i].imag();
    out[i] = std::abs(v) < 1e-15 ? 0.0 : v;
  }
  return out;
}

struct CGCache {
  static constexpr int n = max_supported_degree + 1;
  std::vector<CGTensor> tensors;

  CGCache() {
    tensors.reserve(n * n * n);
    for (int l1 = 0; l1 < n; ++l1)
      for (int l2 = 0; l2 < n; ++l2)
        for (int l3 = 0; l3 < n; ++l3) tensors.emplace_back(l1, l2, l3, real_cg(l1, l2, l3));
  }
};

const CGCache& cg_cache() {
  static const CGCache cache;
  return cache;
}

}  // namespace

const CGTensor& clebsch_gordan(int l1, int l2, int l3) {
  require(l1 >= 0 && l2 >= 0 && l3 >= 0, "CG degrees must be non-negative");
  require(l1 <= max_supported_degree && l2 <= max_supported_degree && l3 <= max_supported_degree,
          fmt::format("CG degree exceeds supported maximum {}", max_supported_degree));
  constexpr int n = CGCache::n;
  return cg_cache().tensors[static_cast<std::size_t>((l1 * n + l2) * n + l3)];
}

// ----------------------------------------------------------- Wigner-D

Eigen::MatrixXd wigner_d(int l, const Rotation& rotation) {
  require(l >= 0 && l <= max_supported_degree, "Wigner-D degree out of range");
  if (l == 0) return Eigen::MatrixXd::Identity(1, 1);
  const Eigen::Matrix3d& b = cartesian_to_sh();
  const Eigen::Matrix3d d1 = b * rotation.matrix() * b.transpose();
  Eigen::MatrixXd d = d1;
  for (int k = 2; k <= l; ++k) {
    // D^k = C (D^{k-1} (x) D^1) C^T with C the (k-1, 1, k) coupling, an isometry.
    const CGTensor& cg = clebsch_gordan(k - 1, 1, k);
    const int na = 2 * k - 1;
    Eigen::MatrixXd c(2 * k + 1, na * 3);
    for (int m3 = 0; m3 < 2 * k + 1; ++m3)
      for (int a = 0; a < na; ++a)
        for (int bb = 0; bb < 3; ++bb) c(m3, a * 3 + bb) = cg(a, bb, m3);
    Eigen::MatrixXd kron(na * 3, na * 3);
    for (int a = 0; a < na; ++a)
      for (int a2 = 0; a2 < na; ++a2) kron.block(a * 3, a2 * 3, 3, 3) = d(a, a2) * d1;
    d = c * kron * c.transpose();
  }
  return d;
}

IrrepsTensor rotate_irreps(const IrrepsTensor& x, const Rotation& rotation) {
  const auto& layout = x.layout();
  IrrepsTensor out(layout);
  std::vector<Eigen::MatrixXd> dcache(static_cast<std::size_t>(layout.max_degree() + 1));
  for (int l = 0; l <= layout.max_degree(); ++l) dcache[l] = wigner_d(l, rotation);
  for (std::size_t b = 0; b < layout.num_blocks(); ++b) {
    const int l = layout.block(b).degree;
    const Eigen::MatrixXd& d = dcache[l];
    for (int m = -l; m <= l; ++m) {
      auto dst = out.row(b, m);
      for (int mp = -l; mp <= l; ++mp) {
        kernels::axpy(dst, x.row(b, mp), d(m + l, mp + l));
      }
    }
  }
  return out;
}

// ------------------------------------------------------- tensor products

TensorProduct::TensorProduct(IrrepsLayout in1, IrrepsLayout in2, IrrepsLayout out)
    : in1_(std::move(in1)), in2_(std::move(in2)), out_(std::move(out)) {
  for (std::size_t b3 = 0; b3 < out_.num_blocks(); ++b3) {
    const auto& o = out_.block(b3);
    bool reachable = false;
    for (std::size_t b1 = 0; b1 < in1_.num_blocks(); ++b1) {
      const auto& p = in1_.block(b1);
      if (p.channels != o.channels) continue;
      for (std::size_t b2 = 0; b2 < in2_.num_blocks(); ++b2) {
        const auto& g = in2_.block(b2);
        if (g.channels != 1 && g.channels != p.channels) continue;
        if (o.degree < std::abs(p.degree - g.degree) || o.degree > p.degree + g.degree) continue;
        const CGTensor& cg = clebsch_gordan(p.degree, g.degree, o.degree);
        TensorProductPath path{b1, b2, b3, p.degree, g.degree, o.degree, o.channels, num_weights_, {}};
        for (int i1 = 0; i1 < 2 * p.degree + 1; ++i1)
          for (int i2 = 0; i2 < 2 * g.degree + 1; ++i2)
            for (int i3 = 0; i3 < 2 * o.degree + 1; ++i3) {
              const double c = cg(i1, i2, i3);
              if (c != 0.0) path.entries.push_back({i1, i2, i3, c});
            }
        num_weights_ += static_cast<std::size_t>(o.channels);
        paths_.push_back(std::move(path));
        reachable = true;
      }
    }
    require(reachable, fmt::format("tensor product output block {}x{}e is unreachable", o.channels,
                                   o.degree));
  }
}

void TensorProduct::accumulate(std::span<const double> p, std::span<const double> g,
                               std::span<const double> weights, std::span<double> out) const {
  std::vector<double> scratch;
  for (const auto& path : paths_) {
    const auto& b1 = in1_.block(path.in1_block);
    const auto& b2 = in2_.block(path.in2_block);
    const std::size_t c = static_cast<std::size_t>(path.channels);
    const auto w = weights.subspan(path.weight_offset, c);
    const auto p_blk = p.subspan(in1_.offset(path.in1_block), b1.dim());
    const auto g_blk = g.subspan(in2_.offset(path.in2_block), b2.dim());
    auto o_blk = out.subspan(out_.offset(path.out_block), out_.block(path.out_block).dim());
    for (const auto& e : path.entries) {
      auto o_row = o_blk.subspan(e.m3 * c, c);
      const auto p_row = p_blk.subspan(e.m1 * c, c);
      if (b2.channels == 1) {
        kernels::scaled_product_acc(o_row, w, p_row, e.coeff * g_blk[e.m2]);
      } else {
        scratch.resize(c);
        for (std::size_t ch = 0; ch < c; ++ch) scratch[ch] = w[ch] * g_blk[e.m2 * c + ch];
        kernels::scaled_product_acc(o_row, scratch, p_row, e.coeff);
      }
    }
  }
}

void TensorProduct::backward(std::span<const double> p, std::span<const double> g,
                             std::span<const double> weights, std::span<const double> dout,
                             std::span<double> dp, std::span<double> dweights) const {
  std::vector<double> scratch;
  for (const auto& path : paths_) {
    const auto& b1 = in1_.block(path.in1_block);
    const auto& b2 = in2_.block(path.in2_block);
    const std::size_t c = static_cast<std::size_t>(path.channels);
    const auto w = weights.subspan(path.weight_offset, c);
    auto dw = dweights.subspan(path.weight_offset, c);
    const auto p_blk = p.subspan(in1_.offset(path.in1_block), b1.dim());
    auto dp_blk = dp.subspan(in1_.offset(path.in1_block), b1.dim());
    const auto g_blk = g.subspan(in2_.offset(path.in2_block), b2.dim());
    const auto do_blk = dout.subspan(out_.offset(path.out_block), out_.block(path.out_block).dim());
    for (const auto& e : path.entries) {
      const auto do_row = do_blk.subspan(e.m3 * c, c);
      const auto p_row = p_blk.subspan(e.m1 * c, c);
      auto dp_row = dp_blk.subspan(e.m1 * c, c);
      if (b2.channels == 1) {
        const double s = e.coeff * g_blk[e.m2];
        kernels::scaled_product_acc(dp_row, w, do_row, s);
        kernels::scaled_product_acc(dw, p_row, do_row, s);
      } else {
        scratch.resize(c);
        for (std::size_t ch = 0; ch < c; ++ch) scratch[ch] = g_blk[e.m2 * c + ch] * do_row[ch];
        kernels::scaled_product_acc(dp_row, w, scratch, e.coeff);
        kernels::scaled_product_acc(dw, p_row, scratch, e.coeff);
      }
    }
  }
}

IrrepsTensor TensorProduct::apply(const IrrepsTensor& p, const IrrepsTensor& g,
                                  std::span<const double> weights) const {
  require(p.layout() == in1_ && g.layout() == in2_, "tensor product operand layout mismatch");
  require(weights.size() == num_weights_, "tensor product weight count mismatch");
  IrrepsTensor out(out_);
  accumulate(p.data(), g.data(), weights, out.data());
  return out;
}

IrrepsTensor tensor_product(const IrrepsTensor& p, const IrrepsTensor& g,
                            const IrrepsLayout& out_layout, std::span<const double> weights) {
  return TensorProduct(p.layout(), g.layout(), out_layout).apply(p, g, weights);
}

// ------------------------------------------------- rank-2 Cartesian tensors

const IrrepsLayout& cartesian_rank2_layout() {
  static const IrrepsLayout layout({{0, 1}, {1, 1}, {2, 1}});
  return layout;
}

Eigen::Matrix3d tensor_expand_3x3(std::span<const double> f9) {
  require(f9.size() == 9, "rank-2 expansion expects 9 components");
  Eigen::Matrix3d sh = Eigen::Matrix3d::Zero();
  int offset = 0;
  for (int l = 0; l <= 2; ++l) {
    const CGTensor& cg = clebsch_gordan(1, 1, l);
    for (int m1 = 0; m1 < 3; ++m1)
      for (int m2 = 0; m2 < 3; ++m2)
        for (int m = 0; m < 2 * l + 1; ++m) sh(m1, m2) += cg(m1, m2, m) * f9[offset + m];
    offset += 2 * l + 1;
  }
  const Eigen::Matrix3d& b = cartesian_to_sh();
  return b.transpose() * sh * b;
}

Eigen::Matrix3d tensor_expand_3x3(const IrrepsTensor& f) {
  require(f.layout() == cartesian_rank2_layout(),
          "tensor_expand_3x3 requires layout 1x0e+1x1e+1x2e, got " + f.layout().to_string());
  return tensor_expand_3x3(f.data());
}

void tensor_expand_3x3_adjoint(const Eigen::Matrix3d& dm, std::span<double> df9) {
  const Eigen::Matrix3d& b = cartesian_to_sh();
  const Eigen::Matrix3d dsh = b * dm * b.transpose();
  int offset = 0;
  for (int l = 0; l <= 2; ++l) {
    const CGTensor& cg = clebsch_gordan(1, 1, l);
    for (int m = 0; m < 2 * l + 1; ++m) {
      double acc = 0.0;
      for (int m1 = 0; m1 < 3; ++m1)
        for (int m2 = 0; m2 < 3; ++m2) acc += cg(m1, m2, m) * dsh(m1, m2);
      df9[offset + m] += acc;
    }
    offset += 2 * l + 1;
  }
}

}  // namespace eqhess
