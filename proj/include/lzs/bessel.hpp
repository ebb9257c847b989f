#pragma once

// Bessel functions of the first kind, integer order, real argument x >= 0.
//
// Two regimes:
//   x < series_cutoff   ascending power series, term by term
//   otherwise           Miller's downward recurrence
//                         J_{k-1} = (2k/x) J_k - J_{k+1}
//                       started far above max(order, x) with an arbitrary
//                       seed and normalised with the sum rule
//                         J_0 + 2 sum_{k>=1} J_{2k} = 1.
//
// Downward recurrence is stable for the minimal solution J, which is what
// makes large orders (J_200 at small x) come out with full relative accuracy
// instead of the garbage upward recurrence produces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lzs/errors.hpp"

namespace lzs {

inline constexpr int bessel_max_order = 200;
inline constexpr double bessel_max_argument = 1e4;

namespace detail {

inline constexpr double bessel_series_cutoff = 1.0;
// Hard ceiling for the table routine; lz_rate needs orders up to ~x+40.
inline constexpr int bessel_table_max_order = 20000;

inline void check_bessel_argument(double x) {
  if (!(x >= 0.0) || x > bessel_max_argument) {
    throw DomainError("bessel: argument x=" + std::to_string(x) +
                      " outside [0, 1e4]");
  }
}

inline double bessel_series(int order, double x) {
  const double half = 0.5 * x;
  double term = std::exp(order * std::log(half) - std::lgamma(order + 1.0));
  double sum = term;
  const double q = half * half;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * (k + order));
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return sum;
}

inline int miller_start(int max_order, double x) {
  const double top = std::max(static_cast<double>(max_order), std::ceil(x));
  int start = static_cast<int>(top + 20.0 + 12.0 * std::cbrt(x) +
                               std::sqrt(40.0 * top));
  return start + (start & 1);
}

}  // namespace detail

/// J_0(x) ... J_max_order(x) in one pass.
inline std::vector<double> bessel_j_table(int max_order, double x) {
  if (max_order < 0 || max_order > detail::bessel_table_max_order) {
    throw DomainError("bessel: table order " + std::to_string(max_order) +
                      " outside [0, 20000]");
  }
  detail::check_bessel_argument(x);

  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (x < detail::bessel_series_cutoff) {
    for (int m = 0; m <= max_order; ++m) out[m] = detail::bessel_series(m, x);
    return out;
  }

  constexpr double big = 1e250;
  constexpr double rescale = 1e-250;

  const int start = detail::miller_start(max_order, x);
  const double two_over_x = 2.0 / x;
  double above = 0.0;     // J_{k+1}
  double current = 1e-30; // J_k, arbitrary seed
  double norm = 0.0;      // 2 * sum of even-order values seen so far (k >= 2)

  for (int k = start; k >= 1; --k) {
    const double below = k * two_over_x * current - above;  // J_{k-1}
    above = current;
    current = below;
    const int idx = k - 1;
    if (idx <= max_order) out[idx] = current;
    if (idx >= 2 && (idx & 1) == 0) norm += 2.0 * current;
    if (std::fabs(current) > big) {
      current *= rescale;
      above *= rescale;
      norm *= rescale;
      for (int m = idx; m <= max_order; ++m) out[m] *= rescale;
    }
  }
  norm += current;  // J_0
  const double inv = 1.0 / norm;
  for (double& v : out) v *= inv;
  return out;
}

/// J_order(x) for 0 <= order <= 200, 0 <= x <= 1e4; absolute error < 1e-10
/// over that envelope. Negative orders are the caller's business:
/// J_{-m}(x) = (-1)^m J_m(x).
inline double bessel_j(int order, double x) {
  if (order < 0 || order > bessel_max_order) {
    throw DomainError("bessel_j: order " + std::to_string(order) +
                      " outside [0, 200]");
  }
  detail::check_bessel_argument(x);
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;
  if (x < detail::bessel_series_cutoff) return detail::bessel_series(order, x);
  return bessel_j_table(order, x)[static_cast<std::size_t>(order)];
}

}  // namespace lzs
