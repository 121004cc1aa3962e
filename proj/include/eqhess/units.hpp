#pragma once

#include <numbers>

// Physical constants (CODATA 2018) and the unit conversions assembled from
// them. Internal units: energy eV, length Angstrom, mass amu, time s.
namespace eqhess::units {

inline constexpr double planck_js = 6.62607015e-34;          // exact
inline constexpr double elementary_charge_c = 1.602176634e-19; // exact
inline constexpr double speed_of_light_ms = 299792458.0;      // exact
inline constexpr double atomic_mass_kg = 1.66053906660e-27;
inline constexpr double hartree_ev = 27.211386245988;
inline constexpr double bohr_angstrom = 0.529177210903;
inline constexpr double angstrom_m = 1e-10;

inline constexpr double hbar_js = planck_js / (2.0 * std::numbers::pi);
inline constexpr double hbar_evs = hbar_js / elementary_charge_c;

/// eV / (Angstrom^2 amu) -> s^-2, the factor turning mass-weighted Hessian
/// eigenvalues into squared angular frequencies.
inline constexpr double mw_hessian_to_s2 =
    elementary_charge_c / (angstrom_m * angstrom_m * atomic_mass_kg);

inline constexpr double hartree_per_bohr_to_ev_per_angstrom = hartree_ev / bohr_angstrom;

/// Angular frequency (s^-1) -> wavenumber (cm^-1).
inline constexpr double angular_to_invcm =
    1.0 / (2.0 * std::numbers::pi * speed_of_light_ms * 100.0);

}  // namespace eqhess::units
