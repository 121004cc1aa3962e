#include <cstdlib>
#include <string>

#include "eqhess/error.hpp"
#include "eqhess/kernels.hpp"

namespace eqhess::kernels {

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(EQHESS_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(EQHESS_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table& table(Isa isa) {
  require(supported(isa), std::string("kernel ISA not available: ") + std::string(name(isa)));
  switch (isa) {
#if defined(EQHESS_HAVE_AVX2)
    case Isa::avx2: return detail::avx2_table();
#endif
#if defined(EQHESS_HAVE_NEON)
    case Isa::neon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
  }
}

namespace {

const Table& select() {
  if (const char* forced = std::getenv("EQHESS_KERNELS")) {
    const std::string want(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == name(isa) && supported(isa)) return table(isa);
    }
  }
  if (supported(Isa::avx2)) return table(Isa::avx2);
  if (supported(Isa::neon)) return table(Isa::neon);
  return detail::scalar_table();
}

}  // namespace

const Table& active() {
  static const Table& t = select();
  return t;
}

}  // namespace eqhess::kernels
