#pragma once

#include <optional>
#include <string_view>

namespace eqhess {

inline constexpr int max_atomic_number = 20;

/// Element symbol -> atomic number for H..Ca; nullopt for anything else.
std::optional<int> atomic_number(std::string_view symbol);

std::string_view element_symbol(int z);

/// IUPAC conventional standard atomic weight (amu).
double standard_mass(int z);

}  // namespace eqhess
