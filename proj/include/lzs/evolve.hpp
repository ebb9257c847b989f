#pragma once

// Time integration of dp/dt = M p. This is the independent check on
// steady_state, so it deliberately shares nothing with it beyond the LU
// helper: L-stable TR-BDF2 steps, step-doubling error control.
//
// TR-BDF2 with g = 2 - sqrt(2) uses the same implicit matrix I - (g/2) h M in
// both stages, so one factorisation serves a whole step. The stages are
// solved for increments, which keeps the rounding error proportional to the
// change per step rather than to h |M|:
//   (I - d h M) u = 2 d h M y_n        y_g = y_n + u   trapezoid to t + g h
//   (I - d h M) v = w u + d h M y_n    y_1 = y_n + v   BDF2 to t + h
// with d = g/2 and w = 1/(g(2-g)).
// Stiff modes are damped to zero as h grows, so steps can expand to the
// slowest time scale. Probability leaks only through rounding in the
// near-singular direction of I - d h M; each step restores the total.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "lzs/errors.hpp"
#include "lzs/kinetics.hpp"
#include "lzs/linalg.hpp"

namespace lzs {

struct EvolveOptions {
  double rtol = 1e-10;
  double atol = 1e-13;
  double initial_step = 0.0;  // 0: 1e-3 / |M|
  long max_steps = 1'000'000;
};

struct EvolveStats {
  long accepted = 0;
  long rejected = 0;
};

namespace detail {

template <std::size_t N>
class TrBdf2 {
 public:
  explicit TrBdf2(const Mat<N>& m) : m_(m) {}

  /// One step of size h; nullopt if the implicit matrix is singular.
  std::optional<Vec<N>> step(const Vec<N>& y, double h) const {
    static const double g = 2.0 - std::sqrt(2.0);
    static const double d = 0.5 * g;
    static const double w = 1.0 / (g * (2.0 - g));

    Mat<N> a{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        a[i][j] = (i == j ? 1.0 : 0.0) - d * h * m_[i][j];
    const auto lu = LuSolver<N>::factor(a, 0.0);
    if (!lu) return std::nullopt;

    // Stage 1: y_g = y + u with (I - dhM) u = 2 dh M y.
    const Vec<N> my = multiply(m_, y);
    Vec<N> rhs{};
    for (std::size_t i = 0; i < N; ++i) rhs[i] = 2.0 * d * h * my[i];
    const Vec<N> u = lu->solve(rhs);

    // Stage 2: (I - dhM) y_1 = y + w u, i.e. y_1 = y + v with
    // (I - dhM) v = w u + dh M y.
    for (std::size_t i = 0; i < N; ++i) rhs[i] = w * u[i] + d * h * my[i];
    const Vec<N> v = lu->solve(rhs);

    Vec<N> out{};
    double total = 0.0, before = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = y[i] + v[i];
      total += out[i];
      before += y[i];
    }
    if (total != 0.0) {
      const double scale = before / total;
      for (double& x : out) x *= scale;
    }
    return out;
  }

 private:
  Mat<N> m_;
};

}  // namespace detail

template <std::size_t N>
Occupation<N> evolve(const RateMatrix<N>& m, const Occupation<N>& p0,
                     double t, const EvolveOptions& opt = {},
                     EvolveStats* stats = nullptr) {
  m.validate();
  if (!(t >= 0.0)) throw DomainError("evolve: t must be >= 0");
  if (std::fabs(p0.sum() - 1.0) > 1e-9) {
    throw DomainError("evolve: initial occupations do not sum to 1");
  }
  const double scale = m.max_abs();
  if (t == 0.0 || scale == 0.0) return p0;

  const detail::TrBdf2<N> stepper(m.entries());
  Vec<N> y = p0.p;
  double now = 0.0;
  double h = opt.initial_step > 0.0 ? opt.initial_step : 1e-3 / scale;
  EvolveStats local;

  while (now < t) {
    if (local.accepted + local.rejected >= opt.max_steps) {
      throw IntegrationError("evolve: step budget exhausted at t=" +
                             std::to_string(now) + " of " + std::to_string(t) +
                             ", h=" + std::to_string(h));
    }
    const bool last = now + h >= t;
    if (last) h = t - now;

    const auto full = stepper.step(y, h);
    const auto mid = stepper.step(y, 0.5 * h);
    const auto half = mid ? stepper.step(*mid, 0.5 * h) : std::nullopt;
    if (!full || !half) {
      throw IntegrationError("evolve: singular stage matrix at t=" +
                             std::to_string(now) + ", h=" + std::to_string(h));
    }

    // Richardson estimate for a second-order method.
    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double tol =
          opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs((*half)[i]));
      err = std::max(err, std::fabs((*half)[i] - (*full)[i]) / (3.0 * tol));
    }

    if (err <= 1.0) {
      // Local extrapolation: the combination is third order and keeps the
      // stationary vector and the total probability fixed.
      for (std::size_t i = 0; i < N; ++i)
        y[i] = (*half)[i] + ((*half)[i] - (*full)[i]) / 3.0;
      now = last ? t : now + h;
      ++local.accepted;
    } else {
      ++local.rejected;
    }
    const double factor =
        err == 0.0 ? 5.0 : std::clamp(0.9 * std::cbrt(1.0 / err), 0.2, 5.0);
    h *= factor;
    if (now < t && (!(h > 0.0) || now + h == now)) {
      throw IntegrationError("evolve: step size underflow at t=" +
                             std::to_string(now));
    }
  }
  if (stats) *stats = local;
  return Occupation<N>{y};
}

}  // namespace lzs
