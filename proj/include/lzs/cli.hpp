#pragma once

// Command-line front end: rates, steady, trace, sweep, spectrum.
// Exit codes: 0 success, 1 usage, 2 numerical/solver, 3 I/O.

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lzs/config.hpp"
#include "lzs/errors.hpp"
#include "lzs/evolve.hpp"
#include "lzs/kinetics.hpp"
#include "lzs/rates.hpp"
#include "lzs/spectrum.hpp"
#include "lzs/sweep.hpp"

namespace lzs {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_numerical = 2, exit_io = 3 };

namespace detail {

struct CliOptions {
  std::optional<std::string> config;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

/// Thrown for problems in the configuration as a whole (not in one solve).
struct UsageError : ConfigError {
  using ConfigError::ConfigError;
};

inline RunConfig resolve_config(const CliOptions& o) {
  RunConfig c = o.config ? load_config(*o.config) : RunConfig{};
  if (o.threads) {
    if (*o.threads < 0) throw UsageError("--threads must be >= 0");
    c.sweep.threads = static_cast<unsigned>(*o.threads);
  }
  if (o.out) c.output.dir = *o.out;
  if (o.format) {
    if (*o.format == "csv") c.output.format = OutputFormat::Csv;
    else if (*o.format == "pgm") c.output.format = OutputFormat::Pgm;
    else if (*o.format == "both") c.output.format = OutputFormat::Both;
    else throw UsageError("--format must be csv, pgm or both");
  }
  // Parameter invariants are configuration errors, not numerical ones.
  try {
    c.sweep.validate();
    c.spectrum.problem.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return c;
}

inline std::string output_path(const RunConfig& c, const std::string& suffix) {
  std::error_code ec;
  std::filesystem::create_directories(c.output.dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + c.output.dir +
                  "': " + ec.message());
  }
  return (std::filesystem::path(c.output.dir) / (c.output.name + suffix))
      .string();
}

template <std::size_t N>
void print_occupations(std::ostream& out, const Occupation<N>& p) {
  const auto labels = level_labels<N>();
  for (std::size_t i = 0; i < N; ++i)
    out << labels[i] << "," << format_number(p[i]) << "\n";
  out << "P_L," << format_number(left_population(p)) << "\n";
}

inline void run_rates(const RunConfig& c, std::ostream& out) {
  const auto& s = c.sweep;
  c.rates.x.validate("rates x axis");
  if (c.rates.x.min < 0.0) throw UsageError("rates x axis: x must be >= 0");
  const int m = s.kinetics.photon_m;
  out << "x,amplitude_ghz,w_resonant_ghz,w_sum_ghz,escape_ghz\n";
  for (double x : c.rates.x.values()) {
    const double a = x * s.omega;
    out << format_number(x) << "," << format_number(a) << ","
        << format_number(lz_rate_resonant(s.lz, m, x)) << ","
        << format_number(lz_rate(s.lz, s.omega, m * s.omega, x)) << ","
        << format_number(escape_rate(s.kinetics.escape, a)) << "\n";
  }
}

inline void run_steady(const RunConfig& c, std::ostream& out) {
  const auto& s = c.sweep;
  const DriveParams drive{s.omega, c.point.amplitude};
  if (s.model() == ModelKind::FourLevel) {
    print_occupations(out, steady_state(build_generator_4(
                               s.kinetics, drive, s.lz,
                               epsilon10_at(s.diagram, c.point.flux))));
  } else {
    print_occupations(out, steady_state(build_generator_6(
                               s.kinetics, drive, s.diagram, c.point.flux)));
  }
}

template <std::size_t N>
void trace_series(const RunConfig& c, const RateMatrix<N>& m,
                  std::ostream& out) {
  if (c.trace.samples < 1) throw UsageError("trace.samples must be >= 1");
  if (!(c.trace.t_end > 0.0)) throw UsageError("trace.t_end_ns must be > 0");
  if (c.trace.initial_level < 0 || c.trace.initial_level >= static_cast<int>(N))
    throw UsageError("trace.initial_level out of range");
  const auto labels = level_labels<N>();
  out << "t_ns";
  for (const auto& l : labels) out << "," << l;
  out << ",P_L\n";
  auto p = Occupation<N>::basis(static_cast<std::size_t>(c.trace.initial_level));
  double t = 0.0;
  for (int i = 0; i <= c.trace.samples; ++i) {
    const double next = c.trace.t_end * i / c.trace.samples;
    p = evolve(m, p, next - t);
    t = next;
    out << format_number(t);
    for (std::size_t k = 0; k < N; ++k) out << "," << format_number(p[k]);
    out << "," << format_number(left_population(p)) << "\n";
  }
}

inline void run_trace(const RunConfig& c, std::ostream& out) {
  const auto& s = c.sweep;
  const DriveParams drive{s.omega, c.point.amplitude};
  if (s.model() == ModelKind::FourLevel) {
    trace_series(c,
                 build_generator_4(s.kinetics, drive, s.lz,
                                   epsilon10_at(s.diagram, c.point.flux)),
                 out);
  } else {
    trace_series(c, build_generator_6(s.kinetics, drive, s.diagram, c.point.flux),
                 out);
  }
}

inline void run_sweep_command(const RunConfig& c, std::ostream& out) {
  const SweepGrid grid = run_sweep(c.sweep);
  const auto fmt = c.output.format;
  if (fmt != OutputFormat::Pgm) {
    const auto path = output_path(c, ".csv");
    export_csv(grid, path);
    out << "wrote " << path << "\n";
  }
  if (fmt != OutputFormat::Csv) {
    const auto path = output_path(c, ".pgm");
    export_heatmap(grid, path);
    out << "wrote " << path << "\n";
  }
}

inline std::string format_anchor_table(const CrossingSpec& spec) {
  std::string s = "crossing." + spec.label + ".gap_ghz = " +
                  format_number(spec.gap) + "\ncrossing." + spec.label +
                  ".anchors = ";
  for (std::size_t i = 0; i < spec.anchors.size(); ++i) {
    if (i) s += ", ";
    s += format_number(spec.anchors[i].flux) + ":" +
         format_number(spec.anchors[i].epsilon);
  }
  return s + "\n";
}

inline void run_spectrum(const RunConfig& c, std::ostream& out,
                         std::ostream& err) {
  const auto& sc = c.spectrum;
  sc.flux.validate("spectrum flux axis");
  if (sc.problem.verify_convergence) {
    SpectrumProblem p = sc.problem;
    p.circuit.flux_bias = sc.flux.values()[static_cast<std::size_t>(sc.flux.steps / 2)];
    const auto r = eigenlevels(p);
    err << "grid doubling shift " << format_number(r.convergence_shift * 1e3)
        << " MHz\n";
  }
  const auto table = spectrum_sweep(sc.problem, sc.flux.values(), c.sweep.threads);

  std::string levels = "flux_phi0";
  for (int i = 0; i < sc.problem.level_count; ++i)
    levels += ",E" + std::to_string(i) + "_ghz";
  levels += "\n";
  for (std::size_t k = 0; k < table.flux.size(); ++k) {
    levels += format_number(table.flux[k]);
    for (double e : table.levels[k])
      levels += "," + format_number(e - table.potential_min[k]);
    levels += "\n";
  }
  const auto levels_path = output_path(c, "_levels.csv");
  write_text_file(levels_path, levels);
  err << "wrote " << levels_path << "\n";

  const auto report = find_anticrossings(table);
  for (const auto& f : report.failures)
    err << "levels " << f.lower << "-" << f.lower + 1 << ": " << f.reason << "\n";
  std::string anchors;
  for (const auto& ac : report.found) {
    const std::string label = "ac" + std::to_string(ac.lower) + "_" +
                              std::to_string(&ac - report.found.data());
    anchors += "# levels " + std::to_string(ac.lower) + "-" +
               std::to_string(ac.lower + 1) + " at flux_bias " +
               format_number(ac.flux) + " Phi0, gap " +
               format_number(ac.gap * 1e3) + " MHz, slopes " +
               format_number(ac.left_slope) + " / " +
               format_number(ac.right_slope) + " GHz/Phi0\n";
    const auto spec = anchors_from_anticrossing(table, ac, report, label);
    if (spec.anchors.size() >= 2) anchors += format_anchor_table(spec);
    else anchors += "# too few clean samples for an anchor table\n";
  }
  const auto anchors_path = output_path(c, "_anchors.cfg");
  write_text_file(anchors_path, anchors);
  err << "wrote " << anchors_path << "\n";
  out << anchors;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out,
                    std::ostream& err) {
  CLI::App app{"Rate-equation model of a strongly driven rf-SQUID qubit"};
  app.require_subcommand(1);
  detail::CliOptions opts;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "key = value config file");
    sub->add_option("--threads", opts.threads, "worker threads (0 = auto)");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--format", opts.format, "csv, pgm or both");
  };
  auto* rates = app.add_subcommand("rates", "LZ and escape rates vs x = A/omega");
  auto* steady = app.add_subcommand("steady", "stationary occupations at one point");
  auto* trace = app.add_subcommand("trace", "time evolution p(t) at one point");
  auto* sweep = app.add_subcommand("sweep", "P_L grid over flux and drive");
  auto* spectrum = app.add_subcommand("spectrum", "double-well levels and anticrossings");
  for (auto* s : {rates, steady, trace, sweep, spectrum}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return exit_usage;
  }

  try {
    const RunConfig c = detail::resolve_config(opts);
    if (rates->parsed()) detail::run_rates(c, out);
    else if (steady->parsed()) detail::run_steady(c, out);
    else if (trace->parsed()) detail::run_trace(c, out);
    else if (sweep->parsed()) detail::run_sweep_command(c, out);
    else detail::run_spectrum(c, out, err);
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return exit_io;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const SolverError& e) {
    err << "numerical error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const DomainError& e) {
    err << "numerical error: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_ok;
}

}  // namespace lzs
