#pragma once

// Ab-initio level structure of a single-mode rf-SQUID.
//
//   H = -K d^2/dphi^2 + U(phi),   phi = Phi / Phi0
//   U(phi) = E_L (phi - phi_x)^2 - E_J cos(2 pi phi)
//   K   = hbar^2 / (2 C Phi0^2)
//   E_L = Phi0^2 / (2 L)
//   E_J = Ic Phi0 / (2 pi)
// all in GHz. Discretised with second-order central differences between hard
// walls; the reported levels are the Richardson extrapolation of the grids
// with spacing h and 2h, which cancels the leading h^2 error.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lzs/constants.hpp"
#include "lzs/errors.hpp"
#include "lzs/level_diagram.hpp"
#include "lzs/parallel.hpp"

namespace lzs {

struct CircuitParams {
  double inductance = 1.3;          // nH
  double capacitance = 35.0;        // fF
  double critical_current = 610.0;  // nA
  double flux_bias = 0.5;           // Phi0

  void validate(bool allow_zero_ic = true) const {
    if (!(inductance > 0.0)) throw DomainError("circuit: L must be > 0");
    if (!(capacitance > 0.0)) throw DomainError("circuit: C must be > 0");
    if (!(critical_current > 0.0) &&
        !(allow_zero_ic && critical_current == 0.0))
      throw DomainError("circuit: Ic must be > 0");
  }

  /// beta_L = 2 pi L Ic / Phi0; a double well needs beta_L > 1.
  [[nodiscard]] double screening_parameter() const {
    return 2.0 * constants::pi * inductance * 1e-9 * critical_current * 1e-9 /
           constants::flux_quantum;
  }

  /// E_L, GHz per Phi0^2.
  [[nodiscard]] double inductive_energy() const {
    return constants::flux_quantum * constants::flux_quantum /
           (2.0 * inductance * 1e-9) / constants::joule_per_ghz;
  }

  [[nodiscard]] double josephson_energy() const {
    return critical_current * 1e-9 * constants::flux_quantum /
           (2.0 * constants::pi) / constants::joule_per_ghz;
  }

  /// K, GHz Phi0^2.
  [[nodiscard]] double kinetic_coefficient() const {
    return constants::hbar * constants::hbar /
           (2.0 * capacitance * 1e-15 * constants::flux_quantum *
            constants::flux_quantum) /
           constants::joule_per_ghz;
  }

  /// 1 / (2 pi sqrt(L C)) in GHz.
  [[nodiscard]] double lc_frequency() const {
    return 1.0 / (2.0 * constants::pi *
                  std::sqrt(inductance * 1e-9 * capacitance * 1e-15)) /
           1e9;
  }

  bool operator==(const CircuitParams&) const = default;
};

/// U(phi) in GHz, phi in units of Phi0.
inline double potential(const CircuitParams& c, double phi) {
  const double d = phi - c.flux_bias;
  return c.inductive_energy() * d * d -
         c.josephson_energy() * std::cos(2.0 * constants::pi * phi);
}

struct PotentialMinimum {
  double phi = 0.0;
  double energy = 0.0;
};

/// Global minimum of U (the deeper well).
inline PotentialMinimum potential_minimum(const CircuitParams& c) {
  const double el = c.inductive_energy();
  const double ej = c.josephson_energy();
  // Stationary points satisfy |phi - phi_x| <= pi E_J / E_L.
  const double reach = constants::pi * ej / el + 0.05;
  constexpr int samples = 4001;
  const double step = 2.0 * reach / (samples - 1);
  int best = 0;
  double best_u = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double u = potential(c, c.flux_bias - reach + i * step);
    if (u < best_u) {
      best_u = u;
      best = i;
    }
  }
  // Golden-section polish inside the bracketing samples.
  double a = c.flux_bias - reach + (best - 1) * step;
  double b = c.flux_bias - reach + (best + 1) * step;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = potential(c, x1), f2 = potential(c, x2);
  for (int it = 0; it < 100 && (b - a) > 1e-14; ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - r * (b - a); f1 = potential(c, x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + r * (b - a); f2 = potential(c, x2);
    }
  }
  const double phi = 0.5 * (a + b);
  const double u = potential(c, phi);
  return u <= best_u ? PotentialMinimum{phi, u}
                     : PotentialMinimum{c.flux_bias - reach + best * step, best_u};
}

struct SpectrumProblem {
  CircuitParams circuit;
  int grid_points = 2048;  // intervals on the fine grid
  std::optional<std::pair<double, double>> flux_window;  // Phi0; unset: auto
  int level_count = 12;
  double wall_factor = 50.0;
  bool verify_convergence = false;
  double convergence_tolerance = 1e-3;  // GHz

  void validate() const {
    circuit.validate();
    if (grid_points < 256 || grid_points % 2 != 0)
      throw DomainError("spectrum: grid_points must be even and >= 256");
    if (level_count < 2) throw DomainError("spectrum: level_count must be >= 2");
    if (level_count >= grid_points / 2)
      throw DomainError("spectrum: level_count exceeds the coarse grid");
    if (flux_window && !(flux_window->first < flux_window->second))
      throw DomainError("spectrum: flux window must be increasing");
    if (!(wall_factor > 1.0)) throw DomainError("spectrum: wall_factor must be > 1");
  }

  bool operator==(const SpectrumProblem&) const = default;
};

struct SpectrumResult {
  std::vector<double> absolute;  // GHz, ascending
  double potential_min = 0.0;    // GHz, deeper-well minimum
  std::pair<double, double> window{0.0, 0.0};
  /// Largest level shift on doubling the grid; NaN when not checked.
  double convergence_shift = std::numeric_limits<double>::quiet_NaN();

  /// Levels measured from the bottom of the deeper well.
  [[nodiscard]] std::vector<double> relative() const {
    std::vector<double> out(absolute);
    for (double& e : out) e -= potential_min;
    return out;
  }
};

namespace detail {

/// Symmetric tridiagonal matrix: diagonal d, off-diagonal e (constant here).
struct Tridiagonal {
  std::vector<double> diag;
  double off = 0.0;

  /// Number of eigenvalues strictly below x (Sturm sequence).
  [[nodiscard]] int count_below(double x) const {
    const double off2 = off * off;
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    int negatives = 0;
    double q = diag[0] - x;
    if (q < 0.0) ++negatives;
    for (std::size_t i = 1; i < diag.size(); ++i) {
      if (std::fabs(q) < tiny) q = -tiny;
      q = diag[i] - x - off2 / q;
      if (q < 0.0) ++negatives;
    }
    return negatives;
  }

  /// Lowest `count` eigenvalues by bisection, ascending.
  [[nodiscard]] std::vector<double> lowest(int count) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const double r = 2.0 * std::fabs(off);
    for (double d : diag) {
      lo = std::min(lo, d - r);
      hi = std::max(hi, d + r);
    }
    std::vector<double> out(static_cast<std::size_t>(count));
    double floor = lo;
    for (int k = 0; k < count; ++k) {
      double a = floor, b = hi;
      // Shrink the upper end using counts; keeps iterations per level low.
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (count_below(mid) > k) b = mid;
        else a = mid;
      }
      out[static_cast<std::size_t>(k)] = 0.5 * (a + b);
      floor = a;
    }
    return out;
  }
};

inline Tridiagonal discretise(const CircuitParams& c,
                              std::pair<double, double> window,
                              int intervals) {
  const double h = (window.second - window.first) / intervals;
  const double k = c.kinetic_coefficient() / (h * h);
  Tridiagonal t;
  t.diag.resize(static_cast<std::size_t>(intervals - 1));
  for (int i = 0; i < intervals - 1; ++i)
    t.diag[static_cast<std::size_t>(i)] =
        2.0 * k + potential(c, window.first + (i + 1) * h);
  t.off = -k;
  return t;
}

inline std::vector<double> richardson_levels(const CircuitParams& c,
                                             std::pair<double, double> window,
                                             int intervals, int count,
                                             std::vector<double>* fine_out =
                                                 nullptr) {
  const auto fine = discretise(c, window, intervals).lowest(count);
  const auto coarse = discretise(c, window, intervals / 2).lowest(count);
  std::vector<double> out(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i)
    out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  if (fine_out) *fine_out = fine;
  return out;
}

/// Symmetric window about phi_x whose walls sit where the potential is at
/// least `factor` times the top level's height above the minimum.
inline std::pair<double, double> wall_window(const CircuitParams& c,
                                             double umin, double top,
                                             double factor) {
  const double need = umin + factor * (top - umin);
  // E_L d^2 - E_J >= need guarantees U >= need for every |phi - phi_x| >= d.
  const double d =
      std::sqrt(std::max(need + c.josephson_energy(), 0.0) /
                c.inductive_energy());
  return {c.flux_bias - d, c.flux_bias + d};
}

}  // namespace detail

/// Window satisfying the hard-wall rule for this problem's circuit.
inline std::pair<double, double> auto_window(const SpectrumProblem& p) {
  const auto& c = p.circuit;
  const auto pmin = potential_minimum(c);
  // Start from a generous harmonic guess of the top level, then shrink the
  // walls onto the computed spectrum. The levels barely depend on where the
  // walls sit, so this settles after a pass or two.
  constexpr double headroom = 1.02;
  double top = pmin.energy + (p.level_count + 1.0) * 2.0 * c.lc_frequency();
  auto window = detail::wall_window(c, pmin.energy, top, p.wall_factor);
  for (int it = 0; it < 8; ++it) {
    const auto levels =
        detail::discretise(c, window, p.grid_points / 2).lowest(p.level_count);
    const double actual = pmin.energy + headroom * (levels.back() - pmin.energy);
    const bool fits = actual <= top;
    const bool tight = actual >= pmin.energy + (top - pmin.energy) / headroom;
    if (fits && tight) break;
    top = actual;
    window = detail::wall_window(c, pmin.energy, top, p.wall_factor);
  }
  return window;
}

/// Lowest level_count eigenvalues, ascending.
inline SpectrumResult eigenlevels(const SpectrumProblem& p) {
  p.validate();
  SpectrumResult r;
  r.potential_min = potential_minimum(p.circuit).energy;
  r.window = p.flux_window ? *p.flux_window : auto_window(p);

  std::vector<double> fine;
  r.absolute = detail::richardson_levels(p.circuit, r.window, p.grid_points,
                                         p.level_count, &fine);
  if (p.verify_convergence) {
    const auto finer =
        detail::discretise(p.circuit, r.window, 2 * p.grid_points)
            .lowest(p.level_count);
    double shift = 0.0;
    for (std::size_t i = 0; i < finer.size(); ++i) {
      const double doubled = (4.0 * finer[i] - fine[i]) / 3.0;
      shift = std::max(shift, std::fabs(doubled - r.absolute[i]));
    }
    r.convergence_shift = shift;
    if (shift > p.convergence_tolerance) {
      throw ResolutionError("eigenlevels: doubling the grid moves a level by " +
                            std::to_string(shift * 1e3) + " MHz");
    }
  }
  return r;
}

/// Eigenlevels over a flux-bias sweep, as a table [flux][level].
struct LevelTable {
  std::vector<double> flux;                  // Phi0
  std::vector<std::vector<double>> levels;   // GHz (absolute)
  std::vector<double> potential_min;         // GHz per flux point
};

/// Every point uses one shared window (the union of the auto windows at the
/// sweep ends and centre), so the grid does not jump between flux points.
inline LevelTable spectrum_sweep(const SpectrumProblem& base,
                                 const std::vector<double>& flux_bias,
                                 unsigned threads = 0) {
  base.validate();
  if (flux_bias.empty()) throw DomainError("spectrum_sweep: empty flux axis");
  std::pair<double, double> window;
  if (base.flux_window) {
    window = *base.flux_window;
  } else {
    window = {std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
    for (double f : {flux_bias.front(), flux_bias[flux_bias.size() / 2],
                     flux_bias.back()}) {
      SpectrumProblem p = base;
      p.circuit.flux_bias = f;
      const auto w = auto_window(p);
      window.first = std::min(window.first, w.first);
      window.second = std::max(window.second, w.second);
    }
  }

  LevelTable table;
  table.flux = flux_bias;
  table.levels.resize(flux_bias.size());
  table.potential_min.resize(flux_bias.size());
  parallel_for(flux_bias.size(), threads, [&](std::size_t i) {
    SpectrumProblem p = base;
    p.circuit.flux_bias = flux_bias[i];
    p.flux_window = window;
    p.verify_convergence = false;
    const auto r = eigenlevels(p);
    table.levels[i] = r.absolute;
    table.potential_min[i] = r.potential_min;
  });
  return table;
}

struct AntiCrossing {
  int lower = 0;            // index of the lower level of the pair
  double flux = 0.0;        // Phi0
  double gap = 0.0;         // GHz, minimum separation
  double left_slope = 0.0;  // GHz per Phi0, lower level, left asymptote
  double right_slope = 0.0; // GHz per Phi0, lower level, right asymptote
};

struct AntiCrossingFailure {
  int lower = 0;
  std::string reason;
};

struct AntiCrossingReport {
  std::vector<AntiCrossing> found;
  std::vector<AntiCrossingFailure> failures;
};

namespace detail {

/// Least-squares slope of y over x; NaN with fewer than two points.
inline double fit_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace detail

/// Local minima of E_{i+1} - E_i over the sweep, refined by fitting a parabola
/// to the squared gap (exact for a two-level crossing). Asymptotic slopes of
/// the lower level come from linear fits to the `fit_points` nearest samples
/// lying at least five gap-widths from the crossing.
inline AntiCrossingReport find_anticrossings(const LevelTable& table,
                                             int fit_points = 5) {
  AntiCrossingReport report;
  const std::size_t n = table.flux.size();
  if (n < 3 || table.levels.size() != n) {
    report.failures.push_back({-1, "need at least 3 sweep points"});
    return report;
  }
  const std::size_t levels = table.levels.front().size();
  for (std::size_t lvl = 0; lvl + 1 < levels; ++lvl) {
    std::vector<double> g2(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double g = table.levels[k][lvl + 1] - table.levels[k][lvl];
      g2[k] = g * g;
    }
    bool any = false;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (!(g2[k] < g2[k - 1] && g2[k] <= g2[k + 1])) continue;
      any = true;
      const double x0 = table.flux[k - 1], x1 = table.flux[k],
                   x2 = table.flux[k + 1];
      const double y0 = g2[k - 1], y1 = g2[k], y2 = g2[k + 1];
      // Parabola y = a (x - xc)^2 + c through three points.
      const double d01 = (y1 - y0) / (x1 - x0);
      const double d12 = (y2 - y1) / (x2 - x1);
      const double a = (d12 - d01) / (x2 - x0);
      if (!(a > 0.0)) {
        report.failures.push_back(
            {static_cast<int>(lvl), "non-convex gap minimum near flux " +
                                        std::to_string(x1)});
        continue;
      }
      const double b = d01 - a * (x0 + x1);
      double xc = -b / (2.0 * a);
      xc = std::clamp(xc, x0, x2);
      const double c2 = y1 - a * (x1 - xc) * (x1 - xc);
      const double gap = std::sqrt(std::max(c2, 0.0));

      // Two-level model: g^2 = (ds)^2 (x - xc)^2 + gap^2.
      const double width = gap / std::sqrt(a);
      const double exclusion = 5.0 * width;
      std::vector<double> lx, ly, rx, ry;
      for (std::size_t j = k + 1; j-- > 0 && static_cast<int>(lx.size()) < fit_points;) {
        if (table.flux[j] < xc - exclusion) {
          lx.push_back(table.flux[j]);
          ly.push_back(table.levels[j][lvl]);
        }
      }
      for (std::size_t j = k; j < n && static_cast<int>(rx.size()) < fit_points; ++j) {
        if (table.flux[j] > xc + exclusion) {
          rx.push_back(table.flux[j]);
          ry.push_back(table.levels[j][lvl]);
        }
      }
      report.found.push_back({static_cast<int>(lvl), xc, gap,
                              detail::fit_slope(lx, ly),
                              detail::fit_slope(rx, ry)});
    }
    if (!any) {
      const bool edge = g2.front() <= g2[1] || g2.back() <= g2[n - 2];
      if (edge) {
        report.failures.push_back(
            {static_cast<int>(lvl), "gap minimum at sweep edge (unbracketed)"});
      }
    }
  }
  return report;
}

/// Detuning table for one anticrossing, compatible with CrossingSpec:
/// eps = sign(x - xc) sqrt(g^2 - gap^2), flux as detuning from Phi0/2 in
/// mPhi0. Samples are limited to half the distance to the nearest other
/// anticrossing touching either level.
inline CrossingSpec anchors_from_anticrossing(const LevelTable& table,
                                              const AntiCrossing& ac,
                                              const AntiCrossingReport& all,
                                              std::string label) {
  double reach = std::numeric_limits<double>::infinity();
  for (const auto& other : all.found) {
    if (&other == &ac) continue;
    if (std::abs(other.lower - ac.lower) <= 1 && other.flux != ac.flux)
      reach = std::min(reach, 0.5 * std::fabs(other.flux - ac.flux));
  }
  CrossingSpec spec;
  spec.label = std::move(label);
  spec.gap = ac.gap;
  const auto lvl = static_cast<std::size_t>(ac.lower);
  for (std::size_t k = 0; k < table.flux.size(); ++k) {
    const double f = table.flux[k];
    if (std::fabs(f - ac.flux) > reach) continue;
    const double g = table.levels[k][lvl + 1] - table.levels[k][lvl];
    const double mag = std::sqrt(std::max(g * g - ac.gap * ac.gap, 0.0));
    const double eps = f < ac.flux ? -mag : mag;
    const Anchor a{(f - 0.5) * 1e3, eps};
    if (spec.anchors.empty() ||
        (a.flux > spec.anchors.back().flux &&
         a.epsilon > spec.anchors.back().epsilon)) {
      spec.anchors.push_back(a);
    }
  }
  return spec;
}

}  // namespace lzs
