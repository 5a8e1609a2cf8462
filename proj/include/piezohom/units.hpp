#pragma once

// Internal unit system: micrometre, N/mm^2 (= MPa), volt.
//
// With lengths in um and stresses in MPa, electric fields are carried in
// V/um. That choice keeps stress, piezoelectric stress coefficients (C/m^2)
// and electric displacement (C/m^2) numerically identical to their SI
// values, so only the quantities below need converting at the IO boundary.
// Forces come out in uN, charges in pC, energies in pJ.

namespace piezohom::units {

/// Vacuum permittivity in F/m.
inline constexpr double vacuum_permittivity = 8.854e-12;

/// F/m -> internal permittivity (C/m^2 per V/um).
inline constexpr double permittivity_to_internal = 1.0e6;
/// m/V -> internal strain-piezo coefficient (per V/um).
inline constexpr double strain_piezo_to_internal = 1.0e6;
/// V/m -> V/um.
inline constexpr double field_to_internal = 1.0e-6;

inline constexpr double permittivity_from_si(double f_per_m) { return f_per_m * permittivity_to_internal; }
inline constexpr double permittivity_to_si(double internal) { return internal / permittivity_to_internal; }
inline constexpr double strain_piezo_from_si(double m_per_v) { return m_per_v * strain_piezo_to_internal; }
inline constexpr double strain_piezo_to_si(double internal) { return internal / strain_piezo_to_internal; }
inline constexpr double field_from_si(double v_per_m) { return v_per_m * field_to_internal; }
inline constexpr double field_to_si(double v_per_um) { return v_per_um / field_to_internal; }

}  // namespace piezohom::units
