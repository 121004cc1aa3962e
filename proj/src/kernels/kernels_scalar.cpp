#include "eqhess/kernels.hpp"

namespace eqhess::kernels::detail {
namespace {

void scaled_product_acc(double* out, const double* a, const double* b, double s,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += s * a[i] * b[i];
}

void axpy(double* out, const double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += s * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Isa::scalar, &scaled_product_acc, &axpy, &dot};
  return t;
}

}  // namespace eqhess::kernels::detail
