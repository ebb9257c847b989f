#pragma once

// Static flux detuning (mPhi0) -> dc energy detuning (GHz) from each avoided
// crossing. The diagram is calibration data: piecewise-linear through anchor
// points read off resonance positions, with the segment slopes free to
// flatten towards the barrier top.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lzs/errors.hpp"

namespace lzs {

struct Anchor {
  double flux = 0.0;     // mPhi0
  double epsilon = 0.0;  // GHz

  bool operator==(const Anchor&) const = default;
};

struct CrossingSpec {
  std::string label;
  double gap = 0.0;  // GHz
  std::vector<Anchor> anchors;
  /// Relative level slope of this transition path; the sideband argument
  /// seen by this crossing is drive_scale * A / omega.
  double drive_scale = 1.0;

  void validate() const {
    if (anchors.size() < 2) {
      throw ConfigError("crossing '" + label + "': need at least 2 anchors");
    }
    for (std::size_t i = 1; i < anchors.size(); ++i) {
      if (!(anchors[i].flux > anchors[i - 1].flux) ||
          !(anchors[i].epsilon > anchors[i - 1].epsilon)) {
        throw ConfigError("crossing '" + label +
                          "': anchors must be strictly increasing in flux "
                          "and epsilon");
      }
    }
    if (!(gap >= 0.0)) throw ConfigError("crossing '" + label + "': gap < 0");
    if (!(drive_scale > 0.0))
      throw ConfigError("crossing '" + label + "': drive_scale must be > 0");
  }

  [[nodiscard]] double span() const {
    return anchors.back().flux - anchors.front().flux;
  }

  bool operator==(const CrossingSpec&) const = default;
};

inline constexpr double anchor_margin_fraction = 0.1;

/// Piecewise-linear interpolation through the anchors, linear extrapolation
/// with the terminal slopes, hard error beyond 10% of the anchor span.
inline double detuning_at(const CrossingSpec& spec, double flux) {
  const auto& a = spec.anchors;
  if (a.size() < 2) {
    throw ConfigError("crossing '" + spec.label + "': need at least 2 anchors");
  }
  const double margin = anchor_margin_fraction * spec.span();
  if (!(flux >= a.front().flux - margin) || !(flux <= a.back().flux + margin)) {
    throw DomainError("crossing '" + spec.label + "': flux " +
                      std::to_string(flux) + " mPhi0 outside anchor domain [" +
                      std::to_string(a.front().flux - margin) + ", " +
                      std::to_string(a.back().flux + margin) + "]");
  }

  // Segment k joins anchors k and k+1; clamp to the terminal segments.
  const auto upper = std::upper_bound(
      a.begin(), a.end(), flux,
      [](double f, const Anchor& an) { return f < an.flux; });
  std::size_t k = static_cast<std::size_t>(upper - a.begin());
  k = std::clamp<std::size_t>(k, 1, a.size() - 1) - 1;

  const Anchor& lo = a[k];
  const Anchor& hi = a[k + 1];
  if (flux == lo.flux) return lo.epsilon;
  if (flux == hi.flux) return hi.epsilon;
  const double t = (flux - lo.flux) / (hi.flux - lo.flux);
  return lo.epsilon + t * (hi.epsilon - lo.epsilon);
}

struct LevelDiagram {
  std::vector<CrossingSpec> crossings;
  double epsilon10_slope = 0.0;  // GHz per mPhi0

  void validate() const {
    for (std::size_t i = 0; i < crossings.size(); ++i) {
      crossings[i].validate();
      for (std::size_t j = 0; j < i; ++j) {
        if (crossings[j].label == crossings[i].label) {
          throw ConfigError("duplicate crossing label '" + crossings[i].label +
                            "'");
        }
      }
    }
  }

  [[nodiscard]] const CrossingSpec* find(const std::string& label) const {
    for (const auto& c : crossings)
      if (c.label == label) return &c;
    return nullptr;
  }

  [[nodiscard]] const CrossingSpec& at(const std::string& label) const {
    if (const auto* c = find(label)) return *c;
    throw ConfigError("unknown crossing label '" + label + "'");
  }

  /// Detuning from the named crossing. Negative flux mirrors the positive
  /// side (the L/R-swapped crossing sits at the mirrored bias).
  [[nodiscard]] double epsilon(const std::string& label, double flux) const {
    return detuning_at(at(label), std::fabs(flux));
  }

  bool operator==(const LevelDiagram&) const = default;
};

/// Tilt between the two well ground states; zero at the symmetry point.
inline double epsilon10_at(const LevelDiagram& diagram, double flux) {
  return diagram.epsilon10_slope * flux;
}

/// Flux where the crossing's detuning equals the target energy (inverse of
/// detuning_at on the anchor domain); nullopt when out of range.
inline std::optional<double> flux_for_detuning(const CrossingSpec& spec,
                                               double epsilon) {
  const auto& a = spec.anchors;
  const double margin = anchor_margin_fraction * spec.span();
  const double f_lo = a.front().flux - margin;
  const double f_hi = a.back().flux + margin;
  double lo = f_lo, hi = f_hi;
  if (epsilon < detuning_at(spec, lo) || epsilon > detuning_at(spec, hi))
    return std::nullopt;
  // Exact on each segment: locate the segment then invert linearly.
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    const bool first = k == 0;
    const bool last = k + 2 == a.size();
    const double seg_lo = first ? f_lo : a[k].flux;
    const double seg_hi = last ? f_hi : a[k + 1].flux;
    const double e_lo = detuning_at(spec, seg_lo);
    const double e_hi = detuning_at(spec, seg_hi);
    if (epsilon >= e_lo && epsilon <= e_hi) {
      if (epsilon == a[k].epsilon) return a[k].flux;
      if (epsilon == a[k + 1].epsilon) return a[k + 1].flux;
      const double slope =
          (a[k + 1].epsilon - a[k].epsilon) / (a[k + 1].flux - a[k].flux);
      return a[k].flux + (epsilon - a[k].epsilon) / slope;
    }
  }
  return std::nullopt;
}

}  // namespace lzs
