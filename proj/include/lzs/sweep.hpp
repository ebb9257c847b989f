#pragma once

// Grid sweeps of the stationary left-well population and their text exports.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lzs/errors.hpp"
#include "lzs/kinetics.hpp"
#include "lzs/level_diagram.hpp"
#include "lzs/parallel.hpp"
#include "lzs/rates.hpp"

namespace lzs {

struct Axis {
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  void validate(const std::string& name) const {
    if (steps < 1) throw ConfigError(name + ": steps must be >= 1");
    if (!std::isfinite(min) || !std::isfinite(max))
      throw ConfigError(name + ": bounds must be finite");
    if (steps == 1 ? !(min <= max) : !(min < max))
      throw ConfigError(name + ": min must be below max");
  }

  /// Evenly spaced values; the last one is exactly max.
  [[nodiscard]] std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(std::max(steps, 0)));
    if (steps == 1) {
      v[0] = min;
      return v;
    }
    const double span = max - min;
    for (int i = 0; i < steps; ++i)
      v[static_cast<std::size_t>(i)] = min + span * i / (steps - 1);
    if (steps > 1) v.back() = max;
    return v;
  }

  /// Spacing between adjacent values (0 for a single point).
  [[nodiscard]] double step() const {
    return steps > 1 ? (max - min) / (steps - 1) : 0.0;
  }

  bool operator==(const Axis&) const = default;
};

enum class DriveAxisKind { Amplitude, Power };

struct DriveAxis {
  Axis axis{0.0, 0.0, 1};
  DriveAxisKind kind = DriveAxisKind::Amplitude;
  /// Amplitude at 0 dBm (GHz) for the power axis: A = A_ref 10^(P/20).
  double reference_amplitude = 333.0;

  [[nodiscard]] double amplitude_for(double value) const {
    return kind == DriveAxisKind::Amplitude
               ? value
               : reference_amplitude * std::pow(10.0, value / 20.0);
  }

  void validate() const {
    axis.validate("drive axis");
    if (kind == DriveAxisKind::Amplitude && axis.min < 0.0)
      throw ConfigError("drive axis: amplitude must be >= 0");
    if (kind == DriveAxisKind::Power && !(reference_amplitude > 0.0))
      throw ConfigError("drive axis: power reference must be > 0");
  }

  bool operator==(const DriveAxis&) const = default;
};

enum class OutputFormat { Csv, Pgm, Both };

struct SweepConfig {
  KineticParams kinetics;
  double omega = 17.0;  // GHz
  LZRateParams lz;      // four-level sideband (gap, dephasing, m_range)
  LevelDiagram diagram;
  Axis flux{0.0, 0.0, 1};  // mPhi0
  DriveAxis drive;
  unsigned threads = 0;

  [[nodiscard]] ModelKind model() const { return kinetics.model; }

  void validate() const {
    kinetics.validate();
    lz.validate();
    if (!(omega > 0.0)) throw ConfigError("drive: omega must be > 0");
    flux.validate("flux axis");
    drive.validate();
    diagram.validate();
    if (model() == ModelKind::SixLevel) {
      for (const auto* label : {&kinetics.crossing1, &kinetics.crossing2}) {
        const CrossingSpec& c = diagram.at(*label);
        const double margin = anchor_margin_fraction * c.span();
        const double lo = c.anchors.front().flux - margin;
        const double hi = c.anchors.back().flux + margin;
        const double reach =
            std::max(std::fabs(flux.min), std::fabs(flux.max));
        const double near =
            (flux.min <= 0.0 && flux.max >= 0.0)
                ? 0.0
                : std::min(std::fabs(flux.min), std::fabs(flux.max));
        if (near < lo || reach > hi) {
          throw ConfigError("flux axis leaves the domain of crossing '" +
                            c.label + "' [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] mPhi0");
        }
      }
    }
  }

  bool operator==(const SweepConfig&) const = default;
};

struct SweepGrid {
  std::vector<double> flux_values;   // mPhi0, one per row
  std::vector<double> drive_values;  // GHz or dBm, one per column
  std::vector<double> p_left;        // row-major

  [[nodiscard]] std::size_t rows() const { return flux_values.size(); }
  [[nodiscard]] std::size_t cols() const { return drive_values.size(); }
  [[nodiscard]] double at(std::size_t row, std::size_t col) const {
    return p_left[row * cols() + col];
  }
  double& at(std::size_t row, std::size_t col) {
    return p_left[row * cols() + col];
  }

  bool operator==(const SweepGrid&) const = default;
};

/// Stationary occupations of the configured model at one point.
struct PointSolution {
  std::vector<double> occupations;
  double p_left = 0.0;
};

inline PointSolution solve_point(const SweepConfig& cfg, double flux,
                                 double amplitude) {
  const DriveParams drive{cfg.omega, amplitude};
  PointSolution s;
  if (cfg.model() == ModelKind::FourLevel) {
    const auto m = build_generator_4(cfg.kinetics, drive, cfg.lz,
                                     epsilon10_at(cfg.diagram, flux));
    const auto p = steady_state(m);
    s.occupations.assign(p.p.begin(), p.p.end());
    s.p_left = left_population(p);
  } else {
    const auto m = build_generator_6(cfg.kinetics, drive, cfg.diagram, flux);
    const auto p = steady_state(m);
    s.occupations.assign(p.p.begin(), p.p.end());
    s.p_left = left_population(p);
  }
  s.p_left = std::clamp(s.p_left, 0.0, 1.0);
  return s;
}

namespace detail {

inline std::string point_label(double flux, double drive) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "flux=%.12g mPhi0, drive=%.12g", flux, drive);
  return buf;
}

}  // namespace detail

/// Stationary P_L over the flux x drive grid. The first failing point (in
/// row-major order) aborts the sweep with its coordinates in the message.
inline SweepGrid run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepGrid grid;
  grid.flux_values = cfg.flux.values();
  grid.drive_values = cfg.drive.axis.values();
  const std::size_t cols = grid.cols();
  grid.p_left.assign(grid.rows() * cols, 0.0);

  parallel_for(grid.p_left.size(), cfg.threads, [&](std::size_t k) {
    const double flux = grid.flux_values[k / cols];
    const double drive = grid.drive_values[k % cols];
    try {
      grid.p_left[k] =
          solve_point(cfg, flux, cfg.drive.amplitude_for(drive)).p_left;
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " at " +
                        detail::point_label(flux, drive));
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at " +
                        detail::point_label(flux, drive));
    }
  });
  return grid;
}

/// Twelve significant digits, trailing zeros kept.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.12g", v);
  return buf;
}

inline std::string format_csv(const SweepGrid& grid) {
  std::string out = "flux_mPhi0";
  for (double d : grid.drive_values) {
    out += ',';
    out += format_number(d);
  }
  out += '\n';
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    out += format_number(grid.flux_values[r]);
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      out += ',';
      out += format_number(grid.at(r, c));
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline double parse_double(std::string_view s, const char* context) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw IoError(std::string(context) + ": bad number '" + tmp + "'");
  }
  return v;
}

}  // namespace detail

/// Inverse of format_csv.
inline SweepGrid parse_csv(std::string_view text) {
  SweepGrid grid;
  auto lines = detail::split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw IoError("csv: empty input");
  const auto header = detail::split(lines[0], ',');
  if (header[0] != "flux_mPhi0") throw IoError("csv: missing flux_mPhi0 header");
  for (std::size_t i = 1; i < header.size(); ++i)
    grid.drive_values.push_back(detail::parse_double(header[i], "csv header"));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = detail::split(lines[r], ',');
    if (cells.size() != header.size())
      throw IoError("csv: row " + std::to_string(r) + " has wrong width");
    grid.flux_values.push_back(detail::parse_double(cells[0], "csv row"));
    for (std::size_t c = 1; c < cells.size(); ++c)
      grid.p_left.push_back(detail::parse_double(cells[c], "csv row"));
  }
  return grid;
}

/// 8-bit grey level, round half up.
inline int pixel_value(double p) {
  return static_cast<int>(std::floor(255.0 * std::clamp(p, 0.0, 1.0) + 0.5));
}

/// Plain PGM: one image row per flux value, highest flux at the top.
inline std::string format_heatmap(const SweepGrid& grid) {
  std::vector<std::size_t> order(grid.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return grid.flux_values[a] > grid.flux_values[b];
  });
  std::string out = "P2\n" + std::to_string(grid.cols()) + " " +
                    std::to_string(grid.rows()) + "\n255\n";
  for (std::size_t r : order) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      if (c) out += ' ';
      out += std::to_string(pixel_value(grid.at(r, c)));
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw IoError("write to '" + path + "' failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("read from '" + path + "' failed");
  return ss.str();
}

inline void export_csv(const SweepGrid& grid, const std::string& path) {
  write_text_file(path, format_csv(grid));
}

inline void export_heatmap(const SweepGrid& grid, const std::string& path) {
  write_text_file(path, format_heatmap(grid));
}

}  // namespace lzs
