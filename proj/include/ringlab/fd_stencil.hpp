#pragma once

#include <ringlab/error.hpp>

#include <vector>

namespace ringlab {

/// Finite-difference weights for derivatives 0..max_order at x0 on the given
/// nodes (Fornberg's recursion). Result is indexed [order][node].
inline std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& x, int max_order) {
  const int n = static_cast<int>(x.size()) - 1;
  require(n >= max_order, ErrorKind::configuration, "too few stencil nodes for the derivative order");
  std::vector<std::vector<double>> c(static_cast<std::size_t>(max_order + 1),
                                     std::vector<double>(static_cast<std::size_t>(n + 1), 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[std::size_t(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[std::size_t(i)] - x[std::size_t(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[std::size_t(k)][std::size_t(i)] =
              c1 * (k * c[std::size_t(k - 1)][std::size_t(i - 1)] - c5 * c[std::size_t(k)][std::size_t(i - 1)]) / c2;
        c[0][std::size_t(i)] = -c1 * c5 * c[0][std::size_t(i - 1)] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[std::size_t(k)][std::size_t(j)] =
            (c4 * c[std::size_t(k)][std::size_t(j)] - k * c[std::size_t(k - 1)][std::size_t(j)]) / c3;
      c[0][std::size_t(j)] = c4 * c[0][std::size_t(j)] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Half-width of the centered stencil for derivative k with accuracy order p (p even).
inline int centered_half_width(int k, int p) { return (k + 1) / 2 - 1 + p / 2; }

/// Centered weights on offsets -M..M (unit spacing) for derivative k, accuracy p.
inline std::vector<double> centered_weights(int k, int p) {
  require(p >= 2 && p % 2 == 0, ErrorKind::configuration, "stencil order must be a positive even integer");
  if (k == 0) return {1.0};
  const int M = centered_half_width(k, p);
  std::vector<double> nodes;
  for (int j = -M; j <= M; ++j) nodes.push_back(double(j));
  return fornberg_weights(0.0, nodes, k)[std::size_t(k)];
}

}  // namespace ringlab
