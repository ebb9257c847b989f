#pragma once

// Line-oriented `key = value` configuration with dotted section prefixes.
//
//   # comment
//   preset = fig3                      optional starting point
//   lz.gamma2_ghz = 2
//   crossing.delta1.anchors = 3:136, 12:153, 23:170, 37:187
//
// Keys are applied in file order on top of the preset. Unknown keys are
// collected and reported together.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lzs/errors.hpp"
#include "lzs/kinetics.hpp"
#include "lzs/level_diagram.hpp"
#include "lzs/rates.hpp"
#include "lzs/spectrum.hpp"
#include "lzs/sweep.hpp"

namespace lzs {

/// Single bias point for `steady` and `trace`.
struct PointConfig {
  double flux = 0.0;       // mPhi0
  double amplitude = 0.0;  // GHz
  bool operator==(const PointConfig&) const = default;
};

struct TraceConfig {
  double t_end = 1e4;  // ns
  int samples = 50;
  int initial_level = 0;
  bool operator==(const TraceConfig&) const = default;
};

/// W vs x table for `rates`.
struct RatesConfig {
  Axis x{0.0, 20.0, 41};
  bool operator==(const RatesConfig&) const = default;
};

struct SpectrumConfig {
  SpectrumProblem problem;
  Axis flux{0.49, 0.51, 201};  // flux bias, Phi0
  bool operator==(const SpectrumConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  std::string name = "sweep";
  OutputFormat format = OutputFormat::Both;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  SweepConfig sweep;
  double temperature = 0.0;  // K; 0 means beta = 0
  PointConfig point;
  TraceConfig trace;
  RatesConfig rates;
  SpectrumConfig spectrum;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

// ---------------------------------------------------------------- presets

/// Four-level model at a single flux point: an amplitude slice across the
/// J_8 lobes into the escape-dominated regime.
inline RunConfig preset_fig2() {
  RunConfig c;
  auto& s = c.sweep;
  s.kinetics.model = ModelKind::FourLevel;
  s.omega = 17.0;
  s.lz = LZRateParams{0.007, 2.0, std::nullopt};
  s.kinetics.gamma_intrawell = 2.0;
  s.kinetics.gamma_relax = 2.0;
  s.kinetics.gamma01 = 1e-7;
  s.kinetics.thermal = ThermalParams{6e-7, 0.0};
  s.kinetics.escape = EscapeParams{5e-9, 1.4, 100.0};
  s.kinetics.photon_m = 8;
  s.kinetics.dephasing = 2.0;
  s.flux = Axis{0.0, 0.0, 1};
  s.drive.axis = Axis{0.0, 1020.0, 500};
  s.drive.kind = DriveAxisKind::Amplitude;
  c.point = PointConfig{0.0, 164.0};
  c.trace = TraceConfig{2e7, 50, 0};
  c.output.name = "fig2";
  return c;
}

/// The fig2 rates with the drive and escape switched off.
inline RunConfig preset_zero_drive() {
  RunConfig c = preset_fig2();
  c.sweep.kinetics.escape.prefactor_a = 0.0;
  c.sweep.drive.axis = Axis{0.0, 0.0, 1};
  c.point = PointConfig{0.0, 0.0};
  c.output.name = "zero_drive";
  return c;
}

/// Six-level model with two crossing sets over a 2-D flux/amplitude map.
inline RunConfig preset_fig3() {
  RunConfig c;
  auto& s = c.sweep;
  s.kinetics.model = ModelKind::SixLevel;
  s.omega = 17.0;
  s.lz = LZRateParams{0.007, 2.0, std::nullopt};
  s.kinetics.gamma_intrawell = 2.0;
  s.kinetics.gamma_relax = 2.0;
  s.kinetics.gamma01 = 1e-7;
  c.temperature = 0.02;
  s.kinetics.thermal = ThermalParams{5e-7, beta_from_temperature(0.02)};
  s.kinetics.escape = EscapeParams{5e-9, 1.4, 100.0};
  s.kinetics.dephasing = 2.0;
  s.kinetics.crossing1 = "delta1";
  s.kinetics.crossing2 = "delta2";
  s.diagram.epsilon10_slope = 0.002;
  s.diagram.crossings = {
      CrossingSpec{"delta1", 0.007,
                   {{3.0, 136.0}, {12.0, 153.0}, {23.0, 170.0}, {37.0, 187.0}},
                   1.0},
      CrossingSpec{"delta2", 0.013,
                   {{-2.0, 153.0}, {10.0, 170.0}, {22.0, 187.0}, {38.0, 204.0}},
                   0.81},
  };
  s.flux = Axis{0.0, 40.0, 200};
  s.drive.axis = Axis{0.0, 400.0, 200};
  s.drive.kind = DriveAxisKind::Amplitude;
  c.point = PointConfig{12.0, 150.0};
  c.trace = TraceConfig{2e7, 50, 0};
  c.output.name = "fig3";
  return c;
}

inline std::optional<RunConfig> preset_by_name(std::string_view name) {
  if (name == "fig2") return preset_fig2();
  if (name == "fig3") return preset_fig3();
  if (name == "zero_drive") return preset_zero_drive();
  if (name == "default") return RunConfig{};
  return std::nullopt;
}

// ---------------------------------------------------------------- parsing

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double config_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

inline long config_long(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

inline int config_int(const std::string& key, const std::string& v) {
  const long x = config_long(key, v);
  if (x < -1'000'000'000L || x > 1'000'000'000L)
    throw ConfigError(key + ": integer out of range");
  return static_cast<int>(x);
}

inline bool config_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline std::vector<Anchor> config_anchors(const std::string& key,
                                          const std::string& v) {
  std::vector<Anchor> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    const auto colon = t.find(':');
    if (colon == std::string::npos)
      throw ConfigError(key + ": anchors are flux:epsilon pairs, got '" + t + "'");
    out.push_back({config_double(key, trim(t.substr(0, colon))),
                   config_double(key, trim(t.substr(colon + 1)))});
  }
  return out;
}

inline CrossingSpec& crossing_slot(RunConfig& c, const std::string& label) {
  for (auto& x : c.sweep.diagram.crossings)
    if (x.label == label) return x;
  c.sweep.diagram.crossings.push_back(CrossingSpec{label, 0.0, {}, 1.0});
  return c.sweep.diagram.crossings.back();
}

/// Applies one key; false if the key is unknown.
inline bool apply_key(RunConfig& c, const std::string& key,
                      const std::string& v) {
  auto& s = c.sweep;
  auto& k = s.kinetics;
  const auto num = [&] { return config_double(key, v); };
  const auto integer = [&] { return config_int(key, v); };

  if (key == "model") {
    if (v == "four_level") k.model = ModelKind::FourLevel;
    else if (v == "six_level") k.model = ModelKind::SixLevel;
    else throw ConfigError(key + ": expected four_level or six_level");
  } else if (key == "drive.omega_ghz") {
    s.omega = num();
  } else if (key == "lz.delta_ghz") {
    s.lz.gap = num();
  } else if (key == "lz.gamma2_ghz") {
    s.lz.dephasing = num();
    k.dephasing = s.lz.dephasing;
  } else if (key == "lz.m_range") {
    if (v == "auto") {
      s.lz.m_range.reset();
    } else {
      const int m = integer();
      if (m < 0) throw ConfigError(key + ": must be >= 0 or auto");
      s.lz.m_range = m;
    }
    k.m_range = s.lz.m_range;
  } else if (key == "kinetics.gamma_intrawell_ghz") {
    k.gamma_intrawell = num();
  } else if (key == "kinetics.gamma_relax_ghz") {
    k.gamma_relax = num();
  } else if (key == "kinetics.gamma01_ghz") {
    if (v == "detailed_balance") k.gamma01.reset();
    else k.gamma01 = num();
  } else if (key == "kinetics.photon_m") {
    k.photon_m = integer();
  } else if (key == "kinetics.crossing1") {
    k.crossing1 = v;
  } else if (key == "kinetics.crossing2") {
    k.crossing2 = v;
  } else if (key == "thermal.gamma10_base_ghz") {
    k.thermal.base_rate = num();
  } else if (key == "thermal.temperature_k") {
    c.temperature = num();
    if (c.temperature < 0.0) throw ConfigError(key + ": must be >= 0");
    k.thermal.beta =
        c.temperature == 0.0 ? 0.0 : beta_from_temperature(c.temperature);
  } else if (key == "escape.a_ghz") {
    k.escape.prefactor_a = num();
  } else if (key == "escape.b") {
    k.escape.slope_b = num();
  } else if (key == "escape.amplitude_unit_ghz") {
    k.escape.amplitude_unit = num();
  } else if (key == "diagram.epsilon10_slope_ghz_per_mphi0") {
    s.diagram.epsilon10_slope = num();
  } else if (key.rfind("crossing.", 0) == 0) {
    const auto dot = key.rfind('.');
    if (dot <= 9) return false;
    const std::string label = key.substr(9, dot - 9);
    const std::string field = key.substr(dot + 1);
    if (field == "gap_ghz") crossing_slot(c, label).gap = num();
    else if (field == "anchors") crossing_slot(c, label).anchors = config_anchors(key, v);
    else if (field == "drive_scale") crossing_slot(c, label).drive_scale = num();
    else return false;
  } else if (key == "sweep.flux_min_mphi0") {
    s.flux.min = num();
  } else if (key == "sweep.flux_max_mphi0") {
    s.flux.max = num();
  } else if (key == "sweep.flux_steps") {
    s.flux.steps = integer();
  } else if (key == "sweep.drive_axis") {
    if (v == "amplitude") s.drive.kind = DriveAxisKind::Amplitude;
    else if (v == "power") s.drive.kind = DriveAxisKind::Power;
    else throw ConfigError(key + ": expected amplitude or power");
  } else if (key == "sweep.drive_min") {
    s.drive.axis.min = num();
  } else if (key == "sweep.drive_max") {
    s.drive.axis.max = num();
  } else if (key == "sweep.drive_steps") {
    s.drive.axis.steps = integer();
  } else if (key == "sweep.power_ref_ghz") {
    s.drive.reference_amplitude = num();
  } else if (key == "run.threads") {
    const int t = integer();
    if (t < 0) throw ConfigError(key + ": must be >= 0");
    s.threads = static_cast<unsigned>(t);
  } else if (key == "point.flux_mphi0") {
    c.point.flux = num();
  } else if (key == "point.amplitude_ghz") {
    c.point.amplitude = num();
  } else if (key == "trace.t_end_ns") {
    c.trace.t_end = num();
  } else if (key == "trace.samples") {
    c.trace.samples = integer();
  } else if (key == "trace.initial_level") {
    c.trace.initial_level = integer();
  } else if (key == "rates.x_min") {
    c.rates.x.min = num();
  } else if (key == "rates.x_max") {
    c.rates.x.max = num();
  } else if (key == "rates.x_steps") {
    c.rates.x.steps = integer();
  } else if (key == "circuit.inductance_nh") {
    c.spectrum.problem.circuit.inductance = num();
  } else if (key == "circuit.capacitance_ff") {
    c.spectrum.problem.circuit.capacitance = num();
  } else if (key == "circuit.critical_current_na") {
    c.spectrum.problem.circuit.critical_current = num();
  } else if (key == "spectrum.grid_points") {
    c.spectrum.problem.grid_points = integer();
  } else if (key == "spectrum.levels") {
    c.spectrum.problem.level_count = integer();
  } else if (key == "spectrum.wall_factor") {
    c.spectrum.problem.wall_factor = num();
  } else if (key == "spectrum.verify") {
    c.spectrum.problem.verify_convergence = config_bool(key, v);
  } else if (key == "spectrum.window_phi0") {
    if (v == "auto") {
      c.spectrum.problem.flux_window.reset();
    } else {
      const auto colon = v.find(':');
      if (colon == std::string::npos)
        throw ConfigError(key + ": expected auto or min:max");
      c.spectrum.problem.flux_window = std::pair{
          config_double(key, trim(v.substr(0, colon))),
          config_double(key, trim(v.substr(colon + 1)))};
    }
  } else if (key == "spectrum.flux_min_phi0") {
    c.spectrum.flux.min = num();
  } else if (key == "spectrum.flux_max_phi0") {
    c.spectrum.flux.max = num();
  } else if (key == "spectrum.flux_steps") {
    c.spectrum.flux.steps = integer();
  } else if (key == "output.dir") {
    c.output.dir = v;
  } else if (key == "output.name") {
    c.output.name = v;
  } else if (key == "output.format") {
    if (v == "csv") c.output.format = OutputFormat::Csv;
    else if (v == "pgm") c.output.format = OutputFormat::Pgm;
    else if (v == "both") c.output.format = OutputFormat::Both;
    else throw ConfigError(key + ": expected csv, pgm or both");
  } else {
    return false;
  }
  return true;
}

}  // namespace detail

/// Parses config text. Throws ConfigError on malformed lines, bad values or
/// unknown keys (all unknown keys are listed in one message).
inline RunConfig parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::optional<std::string> preset;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = detail::trim(t.substr(0, eq));
    std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                        key + "'");
    if (key == "preset") preset = value;
    else entries.emplace_back(std::move(key), std::move(value));
  }

  RunConfig c;
  if (preset) {
    auto p = preset_by_name(*preset);
    if (!p) throw ConfigError("preset: unknown preset '" + *preset + "'");
    c = *p;
  }
  std::vector<std::string> unknown;
  for (const auto& [key, value] : entries) {
    if (!detail::apply_key(c, key, value)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

// ---------------------------------------------------------------- emission

namespace detail {

/// Shortest text that parses back to the same double.
inline std::string exact_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

/// Full, preset-free text for `c`; parse_config(emit_config(c)) == c.
inline std::string emit_config(const RunConfig& c) {
  const auto& s = c.sweep;
  const auto& k = s.kinetics;
  const auto n = detail::exact_number;
  std::ostringstream o;
  o << "model = "
    << (k.model == ModelKind::FourLevel ? "four_level" : "six_level") << "\n"
    << "drive.omega_ghz = " << n(s.omega) << "\n"
    << "lz.delta_ghz = " << n(s.lz.gap) << "\n"
    << "lz.gamma2_ghz = " << n(s.lz.dephasing) << "\n"
    << "lz.m_range = "
    << (s.lz.m_range ? std::to_string(*s.lz.m_range) : std::string("auto"))
    << "\n"
    << "kinetics.gamma_intrawell_ghz = " << n(k.gamma_intrawell) << "\n"
    << "kinetics.gamma_relax_ghz = " << n(k.gamma_relax) << "\n"
    << "kinetics.gamma01_ghz = "
    << (k.gamma01 ? n(*k.gamma01) : std::string("detailed_balance")) << "\n"
    << "kinetics.photon_m = " << k.photon_m << "\n"
    << "kinetics.crossing1 = " << k.crossing1 << "\n"
    << "kinetics.crossing2 = " << k.crossing2 << "\n"
    << "thermal.gamma10_base_ghz = " << n(k.thermal.base_rate) << "\n"
    << "thermal.temperature_k = " << n(c.temperature) << "\n"
    << "escape.a_ghz = " << n(k.escape.prefactor_a) << "\n"
    << "escape.b = " << n(k.escape.slope_b) << "\n"
    << "escape.amplitude_unit_ghz = " << n(k.escape.amplitude_unit) << "\n"
    << "diagram.epsilon10_slope_ghz_per_mphi0 = "
    << n(s.diagram.epsilon10_slope) << "\n";
  for (const auto& x : s.diagram.crossings) {
    o << "crossing." << x.label << ".gap_ghz = " << n(x.gap) << "\n"
      << "crossing." << x.label << ".drive_scale = " << n(x.drive_scale) << "\n"
      << "crossing." << x.label << ".anchors = ";
    for (std::size_t i = 0; i < x.anchors.size(); ++i) {
      if (i) o << ", ";
      o << n(x.anchors[i].flux) << ":" << n(x.anchors[i].epsilon);
    }
    o << "\n";
  }
  o << "sweep.flux_min_mphi0 = " << n(s.flux.min) << "\n"
    << "sweep.flux_max_mphi0 = " << n(s.flux.max) << "\n"
    << "sweep.flux_steps = " << s.flux.steps << "\n"
    << "sweep.drive_axis = "
    << (s.drive.kind == DriveAxisKind::Amplitude ? "amplitude" : "power")
    << "\n"
    << "sweep.drive_min = " << n(s.drive.axis.min) << "\n"
    << "sweep.drive_max = " << n(s.drive.axis.max) << "\n"
    << "sweep.drive_steps = " << s.drive.axis.steps << "\n"
    << "sweep.power_ref_ghz = " << n(s.drive.reference_amplitude) << "\n"
    << "run.threads = " << s.threads << "\n"
    << "point.flux_mphi0 = " << n(c.point.flux) << "\n"
    << "point.amplitude_ghz = " << n(c.point.amplitude) << "\n"
    << "trace.t_end_ns = " << n(c.trace.t_end) << "\n"
    << "trace.samples = " << c.trace.samples << "\n"
    << "trace.initial_level = " << c.trace.initial_level << "\n"
    << "rates.x_min = " << n(c.rates.x.min) << "\n"
    << "rates.x_max = " << n(c.rates.x.max) << "\n"
    << "rates.x_steps = " << c.rates.x.steps << "\n";
  const auto& sp = c.spectrum.problem;
  o << "circuit.inductance_nh = " << n(sp.circuit.inductance) << "\n"
    << "circuit.capacitance_ff = " << n(sp.circuit.capacitance) << "\n"
    << "circuit.critical_current_na = " << n(sp.circuit.critical_current)
    << "\n"
    << "spectrum.grid_points = " << sp.grid_points << "\n"
    << "spectrum.levels = " << sp.level_count << "\n"
    << "spectrum.wall_factor = " << n(sp.wall_factor) << "\n"
    << "spectrum.verify = " << (sp.verify_convergence ? "true" : "false")
    << "\n"
    << "spectrum.window_phi0 = "
    << (sp.flux_window
            ? n(sp.flux_window->first) + ":" + n(sp.flux_window->second)
            : std::string("auto"))
    << "\n"
    << "spectrum.flux_min_phi0 = " << n(c.spectrum.flux.min) << "\n"
    << "spectrum.flux_max_phi0 = " << n(c.spectrum.flux.max) << "\n"
    << "spectrum.flux_steps = " << c.spectrum.flux.steps << "\n"
    << "output.dir = " << c.output.dir << "\n"
    << "output.name = " << c.output.name << "\n"
    << "output.format = "
    << (c.output.format == OutputFormat::Csv   ? "csv"
        : c.output.format == OutputFormat::Pgm ? "pgm"
                                               : "both")
    << "\n";
  return o.str();
}

}  // namespace lzs
