#pragma once

namespace annealtherm {

/// k_B / h in GHz per mK. The single unit-conversion constant in the code
/// base: energies are frequencies (E/h, GHz), temperatures are mK.
inline constexpr double kb_over_h_ghz_per_mk = 0.0208366;

/// A point of the thermal study: Hamiltonian weights A, B (GHz) and the
/// bath temperature (mK). beta_h = 1/(k_B/h * T) in 1/GHz.
struct ThermalPoint {
    double a_ghz = 0.0;
    double b_ghz = 0.0;
    double temperature_mk = 12.0;

    double beta_h() const;
};

}  // namespace annealtherm
