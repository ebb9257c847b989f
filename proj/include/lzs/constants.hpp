#pragma once

// SI values (exact since the 2019 redefinition).

namespace lzs::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double planck = 6.62607015e-34;         // J s
inline constexpr double hbar = planck / (2.0 * pi);      // J s
inline constexpr double boltzmann = 1.380649e-23;        // J / K
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);  // Wb

/// Joules per GHz of ordinary frequency (E = h f).
inline constexpr double joule_per_ghz = planck * 1e9;

}  // namespace lzs::constants
