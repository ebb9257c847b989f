#pragma once

// Elementary rate laws. Every energy and rate is an ordinary frequency in
// GHz (the value usually quoted as X/2pi); times are therefore in ns.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "lzs/bessel.hpp"
#include "lzs/constants.hpp"
#include "lzs/errors.hpp"

namespace lzs {

struct DriveParams {
  double omega = 17.0;     // GHz
  double amplitude = 0.0;  // GHz

  /// Sideband argument A / omega.
  [[nodiscard]] double x() const { return amplitude / omega; }

  void validate() const {
    if (!(omega > 0.0)) throw DomainError("drive: omega must be > 0");
    if (!(amplitude >= 0.0)) throw DomainError("drive: amplitude must be >= 0");
  }
};

struct LZRateParams {
  double gap = 0.007;       // Delta, GHz
  double dephasing = 2.0;   // Gamma_2, GHz
  std::optional<int> m_range;  // unset: see sidebands_for

  void validate() const {
    if (!(gap >= 0.0)) throw DomainError("lz: gap must be >= 0");
    if (!(dephasing > 0.0)) throw DomainError("lz: dephasing must be > 0");
    if (m_range && *m_range < 0) throw DomainError("lz: m_range must be >= 0");
  }

  /// Default truncation ceil(x) + 40, widened to ceil(x) + 11 x^(1/3) once
  /// that is larger (x > ~48), because the J_m(x) cut-off region around
  /// m = x grows like x^(1/3).
  [[nodiscard]] int sidebands_for(double x) const {
    if (m_range) return *m_range;
    const double margin = std::max(40.0, std::ceil(11.0 * std::cbrt(x)));
    return static_cast<int>(std::ceil(x) + margin);
  }

  bool operator==(const LZRateParams&) const = default;
};

/// Over-barrier excitation g = a * exp(b * A / amplitude_unit).
struct EscapeParams {
  double prefactor_a = 5e-9;     // GHz
  double slope_b = 1.4;          // per amplitude_unit
  double amplitude_unit = 1.0;   // GHz

  void validate() const {
    if (!(prefactor_a >= 0.0)) throw DomainError("escape: a must be >= 0");
    if (!(amplitude_unit > 0.0))
      throw DomainError("escape: amplitude unit must be > 0");
  }

  bool operator==(const EscapeParams&) const = default;
};

/// Inter-well relaxation Gamma_10 = base * exp(beta * eps10).
struct ThermalParams {
  double base_rate = 5e-7;  // GHz
  double beta = 0.0;        // 1/GHz

  void validate() const {
    if (!(base_rate >= 0.0)) throw DomainError("thermal: base rate must be >= 0");
    if (!(beta >= 0.0)) throw DomainError("thermal: beta must be >= 0");
  }

  bool operator==(const ThermalParams&) const = default;
};

/// h / (k_B T) in 1/GHz, so that beta * eps is dimensionless for eps in GHz.
inline double beta_from_temperature(double kelvin) {
  if (!(kelvin > 0.0)) throw DomainError("temperature must be > 0");
  return constants::joule_per_ghz / (constants::boltzmann * kelvin);
}

namespace detail {

inline double lorentzian(double detuning, double width) {
  return width / (detuning * detuning + width * width);
}

inline double scaled_exp(double scale, double exponent, const char* what) {
  const double v = scale * std::exp(exponent);
  if (!std::isfinite(v)) {
    throw RateOverflow(std::string(what) + ": exponent " +
                       std::to_string(exponent) + " overflows");
  }
  return v;
}

}  // namespace detail

/// Photon-sideband LZ rate
///   W(eps, x) = Delta^2/2 * sum_{|m|<=M} Gamma_2 J_m(x)^2 / ((eps - m w)^2 + Gamma_2^2).
/// The +m and -m terms are added pairwise, which keeps W(eps) == W(-eps)
/// bit for bit.
inline double lz_rate(const LZRateParams& p, double omega, double epsilon,
                      double x) {
  p.validate();
  if (!(omega > 0.0)) throw DomainError("lz_rate: omega must be > 0");
  if (!(x >= 0.0)) throw DomainError("lz_rate: x must be >= 0");
  if (p.gap == 0.0) return 0.0;

  const int sidebands = p.sidebands_for(x);
  const auto j = bessel_j_table(sidebands, x);
  const double g2 = p.dephasing;

  double sum = j[0] * j[0] * detail::lorentzian(epsilon, g2);
  for (int m = 1; m <= sidebands; ++m) {
    const double jm2 = j[m] * j[m];
    if (jm2 == 0.0) continue;
    const double mw = m * omega;
    sum += jm2 * (detail::lorentzian(epsilon - mw, g2) +
                  detail::lorentzian(epsilon + mw, g2));
  }
  return 0.5 * p.gap * p.gap * sum;
}

/// Single on-resonance term (eps = m w): Delta^2/2 * J_m(x)^2 / Gamma_2.
inline double lz_rate_resonant(const LZRateParams& p, int m, double x) {
  p.validate();
  const double jm = bessel_j(m < 0 ? -m : m, x);
  return 0.5 * p.gap * p.gap * jm * jm / p.dephasing;
}

/// Upper bound on lz_rate(m w) - lz_rate_resonant(m): every discarded
/// sideband sits at least one photon away, and sum_k J_k^2 = 1.
inline double lz_resonant_tail_bound(const LZRateParams& p, double omega,
                                     int m, double x) {
  const double jm = bessel_j(m < 0 ? -m : m, x);
  const double g2 = p.dephasing;
  return 0.5 * p.gap * p.gap * g2 * (1.0 - jm * jm) /
         (omega * omega + g2 * g2);
}

inline double escape_rate(const EscapeParams& p, double amplitude) {
  p.validate();
  if (!(amplitude >= 0.0)) throw DomainError("escape_rate: amplitude < 0");
  if (p.prefactor_a == 0.0) return 0.0;
  return detail::scaled_exp(p.prefactor_a,
                            p.slope_b * amplitude / p.amplitude_unit,
                            "escape_rate");
}

/// eps10 may be negative when the wells tilt the other way.
inline double interwell_rate(const ThermalParams& p, double epsilon10) {
  p.validate();
  if (p.base_rate == 0.0) return 0.0;
  return detail::scaled_exp(p.base_rate, p.beta * epsilon10, "interwell_rate");
}

}  // namespace lzs
