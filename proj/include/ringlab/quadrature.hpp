#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <type_traits>
#include <vector>

namespace ringlab {

struct QuadOptions {
  double rel_tol = 1e-10;
  unsigned max_depth = 40;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b]. Works for real and complex
/// integrands. `error` receives the accumulated error estimate.
template <class F>
auto integrate(F&& f, double a, double b, const QuadOptions& opt = {}, double* error = nullptr) {
  using R = std::decay_t<decltype(f(a))>;
  if (a == b) {
    if (error) *error = 0;
    return R{};
  }
  double err = 0;
  double l1 = 0;
  R v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, opt.max_depth, opt.rel_tol,
                                                                       &err, &l1);
  if (error) *error = err;
  return v;
}

/// Integrates across consecutive breakpoints, e.g. at kinks of a weight.
template <class F>
auto integrate_piecewise(F&& f, std::span<const double> breaks, const QuadOptions& opt = {},
                         double* error = nullptr) {
  using R = std::decay_t<decltype(f(breaks[0]))>;
  R total{};
  double err_total = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double e = 0;
    total += integrate(f, breaks[i], breaks[i + 1], opt, &e);
    err_total += e;
  }
  if (error) *error = err_total;
  return total;
}

/// Componentwise integration of a vector-valued integrand of fixed size.
template <class F>
Eigen::VectorXcd integrate_vector(F&& f, std::span<const double> breaks, Eigen::Index dim,
                                  const QuadOptions& opt = {}, double* error = nullptr) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
  double err_total = 0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    double e = 0;
    out(k) = integrate_piecewise([&](double s) { return std::complex<double>(f(s)(k)); }, breaks, opt, &e);
    err_total += e;
  }
  if (error) *error = err_total;
  return out;
}

}  // namespace ringlab
