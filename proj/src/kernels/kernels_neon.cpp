#include <arm_neon.h>

#include "eqhess/kernels.hpp"

namespace eqhess::kernels::detail {
namespace {

void scaled_product_acc(double* out, const double* a, const double* b, double s,
                        std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t sa = vmulq_f64(vs, vld1q_f64(a + i));
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), sa, vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] += s * a[i] * b[i];
}

void axpy(double* out, const double* x, double s, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), vs, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) out[i] += s * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace

const Table& neon_table() {
  static const Table t{Isa::neon, &scaled_product_acc, &axpy, &dot};
  return t;
}

}  // namespace eqhess::kernels::detail
