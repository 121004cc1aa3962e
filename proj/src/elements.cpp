#include "eqhess/elements.hpp"

#include <array>

#include "eqhess/error.hpp"

namespace eqhess {
namespace {

struct Element {
  std::string_view symbol;
  double mass;
};

constexpr std::array<Element, max_atomic_number> kElements{{
    {"H", 1.008},    {"He", 4.0026},  {"Li", 6.94},    {"Be", 9.0122},
    {"B", 10.81},    {"C", 12.011},   {"N", 14.007},   {"O", 15.999},
    {"F", 18.998},   {"Ne", 20.180},  {"Na", 22.990},  {"Mg", 24.305},
    {"Al", 26.982},  {"Si", 28.085},  {"P", 30.974},   {"S", 32.06},
    {"Cl", 35.45},   {"Ar", 39.95},   {"K", 39.098},   {"Ca", 40.078},
}};

}  // namespace

std::optional<int> atomic_number(std::string_view symbol) {
  for (std::size_t i = 0; i < kElements.size(); ++i) {
    if (kElements[i].symbol == symbol) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

std::string_view element_symbol(int z) {
  require(z >= 1 && z <= max_atomic_number, "atomic number out of range");
  return kElements[z - 1].symbol;
}

double standard_mass(int z) {
  require(z >= 1 && z <= max_atomic_number, "atomic number out of range");
  return kElements[z - 1].mass;
}

}  // namespace eqhess
