#pragma once

// Fixed-size dense helpers for the 4x4 / 6x6 generators.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

namespace lzs {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

template <std::size_t N>
Vec<N> multiply(const Mat<N>& a, const Vec<N>& v) {
  Vec<N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) s += a[i][j] * v[j];
    out[i] = s;
  }
  return out;
}

template <std::size_t N>
double norm_inf(const Vec<N>& v) {
  double m = 0.0;
  for (double x : v) m = std::fmax(m, std::fabs(x));
  return m;
}

/// Max absolute row sum.
template <std::size_t N>
double norm_inf(const Mat<N>& a) {
  double m = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double x : row) s += std::fabs(x);
    m = std::fmax(m, s);
  }
  return m;
}

/// LU factorisation with row equilibration and partial pivoting.
template <std::size_t N>
class LuSolver {
 public:
  /// Returns nullopt when a pivot falls below `pivot_floor` (relative to the
  /// equilibrated rows, whose largest entry is 1).
  static std::optional<LuSolver> factor(Mat<N> a, double pivot_floor = 1e-14) {
    LuSolver lu;
    for (std::size_t i = 0; i < N; ++i) {
      double big = 0.0;
      for (double x : a[i]) big = std::fmax(big, std::fabs(x));
      if (big == 0.0) return std::nullopt;
      lu.row_scale_[i] = 1.0 / big;
      for (double& x : a[i]) x *= lu.row_scale_[i];
      lu.perm_[i] = i;
    }
    for (std::size_t k = 0; k < N; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < N; ++i)
        if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
      if (std::fabs(a[piv][k]) < pivot_floor) return std::nullopt;
      if (piv != k) {
        std::swap(a[piv], a[k]);
        std::swap(lu.perm_[piv], lu.perm_[k]);
      }
      for (std::size_t i = k + 1; i < N; ++i) {
        const double f = a[i][k] / a[k][k];
        a[i][k] = f;
        for (std::size_t j = k + 1; j < N; ++j) a[i][j] -= f * a[k][j];
      }
    }
    lu.lu_ = a;
    return lu;
  }

  [[nodiscard]] Vec<N> solve(const Vec<N>& b) const {
    Vec<N> y{};
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t src = perm_[i];
      double s = b[src] * row_scale_[src];
      for (std::size_t j = 0; j < i; ++j) s -= lu_[i][j] * y[j];
      y[i] = s;
    }
    for (std::size_t i = N; i-- > 0;) {
      double s = y[i];
      for (std::size_t j = i + 1; j < N; ++j) s -= lu_[i][j] * y[j];
      y[i] = s / lu_[i][i];
    }
    return y;
  }

 private:
  Mat<N> lu_{};
  Vec<N> row_scale_{};
  std::array<std::size_t, N> perm_{};
};

}  // namespace lzs
