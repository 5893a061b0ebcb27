#pragma once

// Divided differences of g(v) = -log v at up to a handful of positive nodes.
// For an affine function v on a triangle T, the Hermite-Genocchi formula gives
//   int_T v^-2 dA = 2 |T| g[v1, v2, v3].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace ihm {

namespace detail {

// Relative spread below which the power series in u = v / min - 1 is used.
constexpr double kSeriesSpread = 0.25;

template <std::size_t N>
double neglog_dd_series(const std::array<double, N>& v, std::size_t n, double m) {
  // g[v] = m^-(n-1) * sum_{k >= n-1} (-1)^k / k * h_{k-n+1}(u)
  std::array<double, N> u{};
  for (std::size_t i = 0; i < n; ++i) u[i] = v[i] / m - 1.0;
  constexpr int K = 64;
  std::array<double, K + 1> hk{};
  hk.fill(0.0);
  hk[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 1; j <= K; ++j) hk[j] += u[i] * hk[j - 1];
  const int first = static_cast<int>(n) - 1;
  double sum = 0.0;
  for (int k = std::max(first, 1); k <= K; ++k) {
    const double term = ((k & 1) ? -1.0 : 1.0) / k * hk[k - first];
    sum += term;
    if (k > first + 2 && std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum / std::pow(m, first);
}

template <std::size_t N>
double neglog_dd_sorted(const std::array<double, N>& v, std::size_t lo, std::size_t n) {
  const double a = v[lo], b = v[lo + n - 1];
  if (n == 1) return -std::log(a);
  if (b - a <= kSeriesSpread * a) {
    std::array<double, N> w{};
    for (std::size_t i = 0; i < n; ++i) w[i] = v[lo + i];
    return neglog_dd_series(w, n, a);
  }
  if (n == 2) return -std::log1p((b - a) / a) / (b - a);
  return (neglog_dd_sorted(v, lo + 1, n - 1) - neglog_dd_sorted(v, lo, n - 1)) / (b - a);
}

}  // namespace detail

/// g[v_1, ..., v_n] for g = -log; nodes may repeat.
template <std::size_t N>
double neglog_dd(std::array<double, N> v) {
  std::sort(v.begin(), v.end());
  return detail::neglog_dd_sorted(v, 0, N);
}

}  // namespace ihm
