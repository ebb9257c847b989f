#pragma once

// Rate-equation models of the driven rf-SQUID qubit.
//
// Four-level model, levels |0R>, |0L>, |nL>, |N>:
//   |0R> <-> |nL>   W      photon-assisted LZ, on-resonance single sideband
//   |nL>  -> |0L>   gamma  intra-well relaxation
//   |0R> <-> |0L>   G01 / G10 slow inter-well exchange
//   |0R>, |0L> -> |N>  g   over-barrier excitation, g = a exp(b A)
//   |N> -> |0R>, |0L>  Gamma each
//
// Six-level model, levels |0R>, |0L>, |nR>, |nL>, |(n+1)R>, |(n+1)L>:
//   |0R> <-> |nL>, |0L> <-> |nR>          W1 (Delta1, eps1)
//   |0R> <-> |(n+1)L>, |0L> <-> |(n+1)R>  W2 (Delta2, eps2)
//   excited R levels -> |0R>, excited L levels -> |0L>   Gamma
//   |0R> <-> |0L>   G01 / G10
//
// Generators use the column convention: M[i][j] (i != j) is the rate j -> i
// and every column sums to zero, so dp/dt = M p.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "lzs/errors.hpp"
#include "lzs/level_diagram.hpp"
#include "lzs/linalg.hpp"
#include "lzs/rates.hpp"

namespace lzs {

enum class ModelKind { FourLevel, SixLevel };

template <std::size_t N>
class RateMatrix {
 public:
  static constexpr std::size_t dimension = N;

  RateMatrix() = default;
  explicit RateMatrix(const Mat<N>& entries) : m_(entries) {}

  /// Adds a `from` -> `to` channel and keeps the column balanced.
  void add_transition(std::size_t from, std::size_t to, double rate) {
    m_[to][from] += rate;
    m_[from][from] -= rate;
  }

  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return m_[i][j];
  }
  [[nodiscard]] const Mat<N>& entries() const { return m_; }

  /// Rate i -> j.
  [[nodiscard]] double rate(std::size_t from, std::size_t to) const {
    return m_[to][from];
  }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto& row : m_)
      for (double x : row) m = std::fmax(m, std::fabs(x));
    return m;
  }

  /// Smallest strictly positive off-diagonal rate (0 if none).
  [[nodiscard]] double min_positive_rate() const {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        if (i != j && m_[i][j] > 0.0 && (m == 0.0 || m_[i][j] < m))
          m = m_[i][j];
    return m;
  }

  /// Throws DomainError unless off-diagonals are non-negative and each
  /// column sums to zero within 1e-12 * max|entry|.
  void validate() const {
    const double scale = max_abs();
    for (std::size_t j = 0; j < N; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        if (!std::isfinite(m_[i][j]))
          throw DomainError("rate matrix: non-finite entry");
        if (i != j && m_[i][j] < 0.0)
          throw DomainError("rate matrix: negative off-diagonal rate");
        col += m_[i][j];
      }
      if (std::fabs(col) > 1e-12 * scale)
        throw DomainError("rate matrix: column " + std::to_string(j) +
                          " does not sum to zero");
    }
  }

  bool operator==(const RateMatrix&) const = default;

 private:
  Mat<N> m_{};
};

template <std::size_t N>
constexpr std::array<std::string_view, N> level_labels();

template <>
constexpr std::array<std::string_view, 4> level_labels<4>() {
  return {"|0R>", "|0L>", "|nL>", "|N>"};
}

template <>
constexpr std::array<std::string_view, 6> level_labels<6>() {
  return {"|0R>", "|0L>", "|nR>", "|nL>", "|(n+1)R>", "|(n+1)L>"};
}

template <std::size_t N>
struct Occupation {
  Vec<N> p{};

  [[nodiscard]] double sum() const {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
  }

  [[nodiscard]] double operator[](std::size_t i) const { return p[i]; }

  static Occupation basis(std::size_t i) {
    Occupation o;
    o.p[i] = 1.0;
    return o;
  }

  bool operator==(const Occupation&) const = default;
};

struct KineticParams {
  ModelKind model = ModelKind::FourLevel;
  double gamma_intrawell = 2.0;  // gamma: |nL> -> |0L> (four-level)
  double gamma_relax = 2.0;      // Gamma: |N> and excited well levels
  /// Unset: detailed balance, G01 = G10 * exp(-beta * eps10).
  std::optional<double> gamma01;
  ThermalParams thermal;
  EscapeParams escape;
  double dephasing = 2.0;        // Gamma_2 for the six-level sideband sums
  std::optional<int> m_range;
  int photon_m = 8;              // four-level resonant sideband
  std::string crossing1 = "delta1";
  std::string crossing2 = "delta2";

  void validate() const {
    if (!(gamma_intrawell >= 0.0) || !(gamma_relax >= 0.0))
      throw DomainError("kinetics: relaxation rates must be >= 0");
    if (gamma01 && !(*gamma01 >= 0.0))
      throw DomainError("kinetics: gamma01 must be >= 0");
    if (!(dephasing > 0.0)) throw DomainError("kinetics: dephasing must be > 0");
    thermal.validate();
    escape.validate();
  }

  bool operator==(const KineticParams&) const = default;
};

/// Inter-well pair (G10: |0L> -> |0R>, G01: |0R> -> |0L>) at tilt eps10.
struct InterwellRates {
  double down = 0.0;  // Gamma_10
  double up = 0.0;    // Gamma_01
};

inline InterwellRates interwell_pair(const KineticParams& kp, double eps10) {
  InterwellRates r;
  r.down = interwell_rate(kp.thermal, eps10);
  r.up = kp.gamma01 ? *kp.gamma01
                    : r.down * std::exp(-kp.thermal.beta * eps10);
  return r;
}

/// Four-level generator. `epsilon10` sets G10 through the thermal law
/// (zero by default, i.e. G10 = thermal.base_rate).
inline RateMatrix<4> build_generator_4(const KineticParams& kp,
                                       const DriveParams& drive,
                                       const LZRateParams& lz,
                                       double epsilon10 = 0.0) {
  kp.validate();
  drive.validate();
  lz.validate();
  const double w = lz_rate_resonant(lz, kp.photon_m, drive.x());
  const double g = escape_rate(kp.escape, drive.amplitude);
  const auto th = interwell_pair(kp, epsilon10);

  RateMatrix<4> m;
  m.add_transition(0, 2, w);
  m.add_transition(2, 0, w);
  m.add_transition(2, 1, kp.gamma_intrawell);
  m.add_transition(0, 1, th.up);
  m.add_transition(1, 0, th.down);
  m.add_transition(0, 3, g);
  m.add_transition(1, 3, g);
  m.add_transition(3, 0, kp.gamma_relax);
  m.add_transition(3, 1, kp.gamma_relax);
  return m;
}

/// The two sideband rates of the six-level model at one bias point.
struct SixLevelRates {
  double w1 = 0.0;
  double w2 = 0.0;
  InterwellRates thermal;
};

inline SixLevelRates six_level_rates(const KineticParams& kp,
                                     const DriveParams& drive,
                                     const LevelDiagram& diagram,
                                     double flux) {
  kp.validate();
  drive.validate();
  const CrossingSpec& c1 = diagram.at(kp.crossing1);
  const CrossingSpec& c2 = diagram.at(kp.crossing2);
  const double x = drive.x();

  LZRateParams lz1{c1.gap, kp.dephasing, kp.m_range};
  LZRateParams lz2{c2.gap, kp.dephasing, kp.m_range};

  SixLevelRates r;
  r.w1 = lz_rate(lz1, drive.omega, diagram.epsilon(c1.label, flux),
                 c1.drive_scale * x);
  r.w2 = lz_rate(lz2, drive.omega, diagram.epsilon(c2.label, flux),
                 c2.drive_scale * x);
  r.thermal = interwell_pair(kp, epsilon10_at(diagram, flux));
  return r;
}

inline RateMatrix<6> build_generator_6(const KineticParams& kp,
                                       const DriveParams& drive,
                                       const LevelDiagram& diagram,
                                       double flux) {
  const auto r = six_level_rates(kp, drive, diagram, flux);
  const double relax = kp.gamma_relax;

  RateMatrix<6> m;
  // |0R> <-> |nL>, |0L> <-> |nR>
  m.add_transition(0, 3, r.w1);
  m.add_transition(3, 0, r.w1);
  m.add_transition(1, 2, r.w1);
  m.add_transition(2, 1, r.w1);
  // |0R> <-> |(n+1)L>, |0L> <-> |(n+1)R>
  m.add_transition(0, 5, r.w2);
  m.add_transition(5, 0, r.w2);
  m.add_transition(1, 4, r.w2);
  m.add_transition(4, 1, r.w2);
  // intra-well relaxation
  m.add_transition(2, 0, relax);
  m.add_transition(4, 0, relax);
  m.add_transition(3, 1, relax);
  m.add_transition(5, 1, relax);
  // inter-well exchange
  m.add_transition(0, 1, r.thermal.up);
  m.add_transition(1, 0, r.thermal.down);
  return m;
}

/// Stationary occupations: one balance row is replaced by normalisation and
/// the dense system is solved directly.
template <std::size_t N>
Occupation<N> steady_state(const RateMatrix<N>& m) {
  m.validate();
  Mat<N> a = m.entries();
  for (std::size_t j = 0; j < N; ++j) a[N - 1][j] = 1.0;
  Vec<N> b{};
  b[N - 1] = 1.0;

  const auto lu = LuSolver<N>::factor(a);
  if (!lu) {
    throw DegenerateChain(
        "steady_state: generator has more than one recurrent class");
  }
  Vec<N> p = lu->solve(b);

  // One step of iterative refinement against the full system.
  Vec<N> r = multiply(a, p);
  for (std::size_t i = 0; i < N; ++i) r[i] = b[i] - r[i];
  const Vec<N> dp = lu->solve(r);
  for (std::size_t i = 0; i < N; ++i) p[i] += dp[i];

  const double scale = norm_inf(m.entries());
  if (norm_inf(multiply(m.entries(), p)) > 1e-12 * scale) {
    throw SolverError("steady_state: residual above 1e-12 * |M|");
  }
  for (double& x : p) {
    if (x < -1e-12) {
      throw DegenerateChain("steady_state: negative occupation " +
                            std::to_string(x));
    }
    if (x <= 0.0) x = 0.0;  // also clears a signed zero
  }
  return Occupation<N>{p};
}

/// Measured left-well population. |N> spans both wells and is split equally.
inline double left_population(const Occupation<4>& o) {
  return o[1] + o[2] + 0.5 * o[3];
}

inline double left_population(const Occupation<6>& o) {
  return o[1] + o[3] + o[5];
}

}  // namespace lzs
