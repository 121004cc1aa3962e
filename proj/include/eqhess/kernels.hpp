#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

// Channel-wise arithmetic kernels used by the tensor-product and channel-mixing
// inner loops. Every kernel has a scalar reference implementation and, where
// the target supports it, an AVX2+FMA or NEON variant; one table is selected
// at first use from the running CPU (override with EQHESS_KERNELS=scalar).
namespace eqhess::kernels {

enum class Isa { scalar, avx2, neon };

struct Table {
  Isa isa;
  /// out[i] += s * a[i] * b[i]
  void (*scaled_product_acc)(double* out, const double* a, const double* b, double s,
                             std::size_t n);
  /// out[i] += s * x[i]
  void (*axpy)(double* out, const double* x, double s, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

std::string_view name(Isa isa);
bool supported(Isa isa);
/// Table for a specific ISA; throws InvalidInput when the CPU or build lacks it.
const Table& table(Isa isa);
const Table& active();

namespace detail {
const Table& scalar_table();
#if defined(EQHESS_HAVE_AVX2)
const Table& avx2_table();
#endif
#if defined(EQHESS_HAVE_NEON)
const Table& neon_table();
#endif
}  // namespace detail

inline void scaled_product_acc(std::span<double> out, std::span<const double> a,
                               std::span<const double> b, double s) {
  assert(a.size() == out.size() && b.size() == out.size());
  active().scaled_product_acc(out.data(), a.data(), b.data(), s, out.size());
}

inline void axpy(std::span<double> out, std::span<const double> x, double s) {
  assert(x.size() == out.size());
  active().axpy(out.data(), x.data(), s, out.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

}  // namespace eqhess::kernels
