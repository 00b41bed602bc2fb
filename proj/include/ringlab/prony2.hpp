#pragma once

#include <ringlab/error.hpp>
#include <ringlab/signal_model.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace ringlab {

using PronySamples = std::array<cplx, 4>;

/// Route to the confluent model when |Delta0| < kConfluenceThreshold * max(1,|y0|,|y1|,|y2|)^2.
inline constexpr double kConfluenceThreshold = 1e-8;

/// Two-node roots closer than this (relative to max(1,|z|)) are compared against the confluent fit.
inline constexpr double kCoalescedRootGap = 1e-4;

/// Smallness constant c0 in eta <= c0 |a1 a2| |z1 - z2|^4.
inline constexpr double kPronySmallnessC0 = 1e-2;

/// Conditioning constant: twice the worst ratio observed on prony_calibration_grid()
/// with eta = 1e-10 and 64 perturbation directions. Re-derived in the unit tests.
inline constexpr double kPronyConditioningC = 9.744057;

struct RootLabeling {
  bool swapped = false;
  bool ambiguous = false;
};

struct PronyResult {
  cplx s1, s2;
  cplx z1, z2;
  cplx delta0;
  bool confluent = false;
  cplx b0, b1;  ///< confluent amplitudes
  cplx a1, a2;  ///< two-node amplitudes
  double residual = 0.0;  ///< model misfit on y2, y3
  std::optional<RootLabeling> labels;
};

inline cplx hankel_det(cplx y0, cplx y1, cplx y2) { return y0 * y2 - y1 * y1; }

inline double confluence_scale(const PronySamples& y) {
  const double m = std::max({1.0, std::abs(y[0]), std::abs(y[1]), std::abs(y[2])});
  return m * m;
}

/// Roots of x^2 - s1 x + s2 without cancellation in s1 +- sqrt(disc).
inline std::pair<cplx, cplx> quadratic_roots(cplx s1, cplx s2) {
  const cplx sq = std::sqrt(s1 * s1 - 4.0 * s2);
  const cplx q = (std::abs(s1 + sq) >= std::abs(s1 - sq)) ? 0.5 * (s1 + sq) : 0.5 * (s1 - sq);
  if (q == cplx(0.0)) return {0.0, 0.0};
  return {q, s2 / q};
}

/// Two-node solve without confluence routing. Requires Delta0 != 0.
inline PronyResult prony4_two_node(const PronySamples& y) {
  PronyResult r;
  r.delta0 = hankel_det(y[0], y[1], y[2]);
  require(r.delta0 != cplx(0.0), ErrorKind::degenerate_signal, "Hankel determinant is zero");
  // y2 = s1 y1 - s2 y0, y3 = s1 y2 - s2 y1
  r.s1 = (y[0] * y[3] - y[1] * y[2]) / r.delta0;
  r.s2 = (y[1] * y[3] - y[2] * y[2]) / r.delta0;
  std::tie(r.z1, r.z2) = quadratic_roots(r.s1, r.s2);
  if (r.z1 == r.z2) {
    r.a1 = r.a2 = std::numeric_limits<double>::quiet_NaN();
    r.residual = std::numeric_limits<double>::infinity();
    return r;
  }
  r.a2 = (y[1] - r.z1 * y[0]) / (r.z2 - r.z1);
  r.a1 = y[0] - r.a2;
  const cplx p2 = r.a1 * r.z1 * r.z1 + r.a2 * r.z2 * r.z2;
  const cplx p3 = r.a1 * r.z1 * r.z1 * r.z1 + r.a2 * r.z2 * r.z2 * r.z2;
  r.residual = std::abs(y[2] - p2) + std::abs(y[3] - p3);
  return r;
}

struct ConfluentFit {
  cplx b0, b1, z;
  double residual = 0.0;  ///< |y2 - model| + |y3 - model|
};

/// y_j = (b0 + b1 j) z^j. z comes from the double-root recurrence
/// y_{j+2} = 2 z y_{j+1} - z^2 y_j; the candidate with the smaller
/// recurrence misfit wins (s1/2 from the linear solve, or the least-squares
/// sample ratio when Delta0 vanishes).
inline ConfluentFit confluent_fit(const PronySamples& y, std::optional<cplx> z_prior = std::nullopt) {
  auto misfit = [&](cplx z) {
    return std::abs(y[2] - 2.0 * z * y[1] + z * z * y[0]) + std::abs(y[3] - 2.0 * z * y[2] + z * z * y[1]);
  };
  std::vector<cplx> cand;
  const cplx d0 = hankel_det(y[0], y[1], y[2]);
  if (d0 != cplx(0.0)) cand.push_back(0.5 * (y[0] * y[3] - y[1] * y[2]) / d0);
  double den = 0.0;
  cplx num = 0.0;
  for (int j = 0; j < 3; ++j) {
    num += std::conj(y[std::size_t(j)]) * y[std::size_t(j + 1)];
    den += std::norm(y[std::size_t(j)]);
  }
  if (den > 0.0) cand.push_back(num / den);
  require(!cand.empty(), ErrorKind::degenerate_signal, "confluent fit on all-zero data");

  cplx best = cand.front();
  double best_m = misfit(best);
  for (std::size_t i = 1; i < cand.size(); ++i) {
    const double m = misfit(cand[i]);
    const bool tie = std::abs(m - best_m) <= 1e-14 * (1.0 + best_m);
    if (m < best_m && !tie) {
      best = cand[i];
      best_m = m;
    } else if (tie && z_prior && std::abs(cand[i] - *z_prior) < std::abs(best - *z_prior)) {
      best = cand[i];
      best_m = m;
    }
  }
  if (std::abs(best) < 1e-300) fail(ErrorKind::degenerate_signal, "confluent node z = 0");
  ConfluentFit f;
  f.z = best;
  f.b0 = y[0];
  f.b1 = y[1] / f.z - y[0];
  const cplx z2 = f.z * f.z;
  f.residual = std::abs(y[2] - (f.b0 + 2.0 * f.b1) * z2) + std::abs(y[3] - (f.b0 + 3.0 * f.b1) * z2 * f.z);
  return f;
}

/// Four-sample two-node Prony with automatic routing to the confluent model.
/// Also routes to the confluent model when the two-node roots nearly coincide
/// and the confluent fit explains y2, y3 better.
inline PronyResult prony4(const PronySamples& y) {
  const cplx d0 = hankel_det(y[0], y[1], y[2]);
  if (std::abs(d0) >= kConfluenceThreshold * confluence_scale(y)) {
    PronyResult two = prony4_two_node(y);
    const double near = kCoalescedRootGap * std::max(1.0, std::abs(two.z1));
    if (std::abs(two.z1 - two.z2) >= near) return two;
    if (confluent_fit(y).residual >= two.residual) return two;
  }
  const auto f = confluent_fit(y);
  PronyResult r;
  r.delta0 = d0;
  r.confluent = true;
  r.z1 = r.z2 = f.z;
  r.s1 = 2.0 * f.z;
  r.s2 = f.z * f.z;
  r.b0 = f.b0;
  r.b1 = f.b1;
  r.residual = f.residual;
  return r;
}

/// Nearest-prior matching; ambiguous unless each prior's disk of radius
/// |p1 - p2|/4 holds exactly one root.
inline RootLabeling label_roots(std::pair<cplx, cplx> roots, std::pair<cplx, cplx> priors) {
  const double rho = 0.25 * std::abs(priors.first - priors.second);
  require(rho > 0.0, ErrorKind::configuration, "priors must be distinct");
  RootLabeling l;
  const double id = std::abs(roots.first - priors.first) + std::abs(roots.second - priors.second);
  const double sw = std::abs(roots.first - priors.second) + std::abs(roots.second - priors.first);
  l.swapped = sw < id;
  auto in = [rho](cplx r, cplx p) { return std::abs(r - p) <= rho; };
  const cplx p1 = l.swapped ? priors.second : priors.first;
  const cplx p2 = l.swapped ? priors.first : priors.second;
  l.ambiguous = !(in(roots.first, p1) && in(roots.second, p2));
  return l;
}

/// prony4 followed by label_roots against the priors; z1 ends up matched to priors.first.
inline PronyResult prony4(const PronySamples& y, std::pair<cplx, cplx> priors) {
  PronyResult r = prony4(y);
  r.labels = label_roots({r.z1, r.z2}, priors);
  if (r.labels->swapped) {
    std::swap(r.z1, r.z2);
    std::swap(r.a1, r.a2);
  }
  return r;
}

inline PronySamples two_mode_samples(cplx a1, cplx a2, cplx z1, cplx z2) {
  PronySamples y;
  cplx p1 = 1.0, p2 = 1.0;
  for (std::size_t j = 0; j < 4; ++j) {
    y[j] = a1 * p1 + a2 * p2;
    p1 *= z1;
    p2 *= z2;
  }
  return y;
}

inline PronySamples confluent_samples(cplx b0, cplx b1, cplx z) {
  PronySamples y;
  cplx p = 1.0;
  for (std::size_t j = 0; j < 4; ++j) {
    y[j] = (b0 + b1 * double(j)) * p;
    p *= z;
  }
  return y;
}

/// Largest root error over `directions` perturbations of size eta per sample.
inline double worst_root_error(cplx a1, cplx a2, cplx z1, cplx z2, double eta, int directions = 64,
                               std::uint64_t seed = 0x5eedULL) {
  const auto y = two_mode_samples(a1, a2, z1, z2);
  double worst = 0.0;
  std::uint64_t state = seed;
  for (int d = 0; d < directions; ++d) {
    PronySamples yt = y;
    for (auto& v : yt) {
      state = lcg::advance(state, 1);
      v += std::polar(eta, 2.0 * std::numbers::pi * lcg::to_unit(state));
    }
    const auto r = prony4_two_node(yt);
    const double e_id = std::max(std::abs(r.z1 - z1), std::abs(r.z2 - z2));
    const double e_sw = std::max(std::abs(r.z1 - z2), std::abs(r.z2 - z1));
    worst = std::max(worst, std::min(e_id, e_sw));
  }
  return worst;
}

/// eta / (|a1 a2| |z1 - z2|^3)
inline double conditioning_scale(cplx a1, cplx a2, cplx z1, cplx z2, double eta) {
  return eta / (std::abs(a1 * a2) * std::pow(std::abs(z1 - z2), 3));
}

struct PronyCase {
  cplx a1, a2, z1, z2;
};

namespace detail {

inline std::vector<PronyCase> prony_grid(const std::vector<double>& seps, const std::vector<double>& mags,
                                         const std::vector<cplx>& centers, const std::vector<double>& angles,
                                         double phase2) {
  std::vector<PronyCase> out;
  for (double s : seps)
    for (double m1 : mags)
      for (double m2 : mags)
        for (cplx c : centers)
          for (double th : angles) {
            const cplx h = std::polar(0.5 * s, th);
            PronyCase pc{m1, std::polar(m2, phase2), c + h, c - h};
            if (std::abs(pc.z1) <= 1.0 && std::abs(pc.z2) <= 1.0) out.push_back(pc);
          }
  return out;
}

}  // namespace detail

/// Coarse grid over |z1 - z2| in [0.1, 0.5], |a| in [0.5, 2], |z| <= 1.
inline std::vector<PronyCase> prony_calibration_grid() {
  const double pi = std::numbers::pi;
  return detail::prony_grid({0.1, 0.2, 0.3, 0.4, 0.5}, {0.5, 1.0, 2.0}, {cplx(0.0), cplx(0.5, 0.0), cplx(-0.2, 0.6)},
                            {0.0, pi / 4, pi / 2}, pi / 3);
}

/// Finer grid disjoint from the calibration grid, inside the same parameter box.
inline std::vector<PronyCase> prony_validation_grid() {
  const double pi = std::numbers::pi;
  return detail::prony_grid({0.125, 0.175, 0.25, 0.35, 0.45}, {0.6, 0.85, 1.3, 1.8},
                            {cplx(-0.35, 0.0), cplx(0.3, 0.3), cplx(0.0, -0.6), cplx(0.7, 0.0)},
                            {pi / 6, 2 * pi / 3, 5 * pi / 6}, 2 * pi / 5);
}

inline double conditioning_ratio(const PronyCase& c, double eta, int directions = 64) {
  return worst_root_error(c.a1, c.a2, c.z1, c.z2, eta, directions) / conditioning_scale(c.a1, c.a2, c.z1, c.z2, eta);
}

/// 2 x max ratio over a grid.
inline double calibrate_conditioning_constant(const std::vector<PronyCase>& grid, double eta = 1e-10) {
  double worst = 0.0;
  for (const auto& c : grid) worst = std::max(worst, conditioning_ratio(c, eta));
  return 2.0 * worst;
}

/// Least-squares slope of log(worst root error) against log|z1 - z2|.
inline double prony_slope_probe(cplx a1, cplx a2, cplx center, double angle, const std::vector<double>& seps,
                                double eta, int directions = 64) {
  std::vector<double> x, yv;
  for (double s : seps) {
    const cplx h = std::polar(0.5 * s, angle);
    x.push_back(std::log(s));
    yv.push_back(std::log(worst_root_error(a1, a2, center + h, center - h, eta, directions)));
  }
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += yv[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (yv[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

struct ConditioningReport {
  double delta0_mag = 0.0;
  bool smallness_ok = false;
  double bound = 0.0;
  std::optional<double> scaling_exponent_probe;
};

inline ConditioningReport conditioning_report(cplx a1, cplx a2, cplx z1, cplx z2, double eta, bool probe = false,
                                              double c_hat = kPronyConditioningC, double c0 = kPronySmallnessC0) {
  require(a1 * a2 != cplx(0.0), ErrorKind::configuration, "conditioning needs a1 a2 != 0");
  if (z1 == z2) fail(ErrorKind::degenerate_signal, "coalesced nodes");
  ConditioningReport r;
  const double sep = std::abs(z1 - z2);
  r.delta0_mag = std::abs(a1 * a2) * sep * sep;
  r.smallness_ok = eta <= c0 * std::abs(a1 * a2) * std::pow(sep, 4);
  r.bound = c_hat * conditioning_scale(a1, a2, z1, z2, eta);
  if (probe) {
    const cplx c = 0.5 * (z1 + z2);
    const double th = std::arg(z1 - z2);
    const double e = eta > 0.0 ? eta : 1e-8;
    r.scaling_exponent_probe = prony_slope_probe(a1, a2, c, th, {sep, sep / 2, sep / 4, sep / 8}, e);
  }
  return r;
}

}  // namespace ringlab
