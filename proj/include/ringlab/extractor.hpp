#pragma once

#include <ringlab/error.hpp>
#include <ringlab/signal_model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace ringlab {

struct ExtractionConfig {
  ObservationSetup setup;
  ComplexFrequency prior;
  double amp_floor = 0.0;
  std::optional<double> c_sep;  ///< labeled-disk separation, enables the disk flag
};

struct HypothesisFlags {
  bool eps_small = false;   ///< eps <= min(1/8, |z|/20)
  bool branch_hyp = false;  ///< |z - z#| <= |z#|/4 and |zhat - z| <= |z|/2
  bool disk_hyp = false;    ///< eps <= (c_sep/40) delta |z|
};

struct ExtractionResult {
  cplx z_hat;
  ComplexFrequency omega_hat;
  bool has_reference = false;
  cplx z_true;
  ComplexFrequency omega_true;
  double eps0 = 0.0;
  double eps1 = 0.0;
  double eps = 0.0;
  double bound_z = std::numeric_limits<double>::quiet_NaN();        ///< NaN when eps0 > 1/4
  double bound_z_crude = std::numeric_limits<double>::quiet_NaN();  ///< NaN when eps > 1/8
  double bound_omega = std::numeric_limits<double>::quiet_NaN();
  HypothesisFlags hypotheses_ok;
};

struct ResidualSizes {
  double eps0 = 0.0;
  double eps1 = 0.0;
  double eps = 0.0;
};

namespace detail {

inline cplx rayleigh_ratio(cplx num, cplx den) {
  if (!(std::isfinite(den.real()) && den.real() > 0.0))
    fail(ErrorKind::degenerate_signal, "<y,y>_w vanishes; Rayleigh quotient undefined");
  return num / den.real();
}

}  // namespace detail

/// zhat = <S_delta y, y>_w / <y, y>_w
inline cplx rayleigh_quotient(const SampledSignal& y, const ObservationSetup& setup) {
  const SampledSignal sy = shift(y, setup.delta);
  return detail::rayleigh_ratio(weighted_inner(sy, y, setup), weighted_inner(y, y, setup));
}

/// Continuous version with adaptive quadrature for every inner product.
inline cplx rayleigh_quotient(const TimeFunction& y, const ObservationSetup& setup, const QuadOptions& opt = {}) {
  const double d = setup.delta;
  TimeFunction sy = [&y, d](double t) { return y(t + d); };
  return detail::rayleigh_ratio(weighted_inner_quad(sy, y, setup, opt), weighted_inner_quad(y, y, setup, opt));
}

namespace detail {

inline ResidualSizes make_sizes(double r_norm, double sr_norm, double y0_norm) {
  if (!(y0_norm > 0.0)) fail(ErrorKind::detectability, "reference mode has zero weighted energy");
  ResidualSizes s{r_norm / y0_norm, sr_norm / y0_norm, 0.0};
  s.eps = std::max(s.eps0, s.eps1);
  return s;
}

}  // namespace detail

/// eps0 = |r|_w / |y0|_w, eps1 = |S r|_w / |y0|_w. The reference norm uses the
/// same rule as the residual (closed form when r is tagged, trapezoid otherwise).
inline ResidualSizes residual_sizes(const std::vector<Mode>& y0_modes, const SampledSignal& r,
                                    const ObservationSetup& setup) {
  const double rn = weighted_norm(r, setup);
  const double srn = weighted_norm(shift(r, setup.delta), setup);
  double y0n = 0.0;
  if (r.exact_modes) {
    y0n = weighted_norm_modes(y0_modes, setup);
  } else {
    SampledSignal y0 = sample_grid(y0_modes, {}, {}, r.t_start, r.dt, r.size());
    y0n = weighted_norm(y0, setup);
  }
  return detail::make_sizes(rn, srn, y0n);
}

inline ResidualSizes residual_sizes(const std::vector<Mode>& y0_modes, const TimeFunction& r,
                                    const ObservationSetup& setup, const QuadOptions& opt = {}) {
  const double d = setup.delta;
  TimeFunction sr = [&r, d](double t) { return r(t + d); };
  auto nrm = [&](const TimeFunction& f) {
    return std::sqrt(std::max(0.0, weighted_inner_quad(f, f, setup, opt).real()));
  };
  return detail::make_sizes(nrm(r), nrm(sr), weighted_norm_modes(y0_modes, setup));
}

/// (eps0 + eps1)(1 + eps0)/(1 - 2 eps0), valid for eps0 <= 1/4.
inline double stability_bound(double eps0, double eps1) {
  if (eps0 > 0.25) fail(ErrorKind::hypothesis, "stability bound needs eps0 <= 1/4");
  return (eps0 + eps1) * (1.0 + eps0) / (1.0 - 2.0 * eps0);
}

/// 3 eps, valid for eps <= 1/8.
inline double crude_stability_bound(double eps) {
  if (eps > 0.125) fail(ErrorKind::hypothesis, "crude stability bound needs eps <= 1/8");
  return 3.0 * eps;
}

/// (2/|z|) |zhat - z|, valid for |zhat - z| <= |z|/2.
inline double log_lip_bound(cplx z, cplx z_hat) {
  const double d = std::abs(z_hat - z);
  if (d > 0.5 * std::abs(z)) fail(ErrorKind::hypothesis, "log-Lipschitz bound needs |zhat - z| <= |z|/2");
  return 2.0 * d / std::abs(z);
}

/// Logarithm relative to the prior: omega_hat = prior + (i/delta) Log(zhat/z#).
inline ComplexFrequency branch_log(cplx z_hat, ComplexFrequency prior, double delta) {
  require(delta > 0.0, ErrorKind::configuration, "delta must be > 0");
  const cplx z_sharp = std::exp(-kI * prior.value() * delta);
  const cplx ratio = z_hat / z_sharp;
  if (!(std::abs(ratio - 1.0) <= 0.625)) fail(ErrorKind::branch, "zhat/z# outside the disk |ratio - 1| <= 5/8");
  return ComplexFrequency::from(prior.value() + kI / delta * std::log(ratio));
}

inline bool branch_hypotheses(cplx z, cplx z_hat, ComplexFrequency prior, double delta) {
  const cplx z_sharp = std::exp(-kI * prior.value() * delta);
  return std::abs(z - z_sharp) <= 0.25 * std::abs(z_sharp) && std::abs(z_hat - z) <= 0.5 * std::abs(z);
}

/// 10 eps / (delta |z|)
inline double omega_error_bound(double eps, cplx z, double delta) { return 10.0 * eps / (delta * std::abs(z)); }

/// Rayleigh quotient plus branch selection. With a one-mode reference the
/// residual sizes, certified bounds and hypothesis flags are filled in.
inline ExtractionResult extract(const SampledSignal& y, const ExtractionConfig& cfg,
                                const std::optional<std::vector<Mode>>& y0_reference = std::nullopt) {
  cfg.setup.validate();
  require(std::isfinite(cfg.prior.re) && std::isfinite(cfg.prior.im), ErrorKind::configuration, "prior not finite");
  ExtractionResult res;
  res.z_hat = rayleigh_quotient(y, cfg.setup);
  res.omega_hat = branch_log(res.z_hat, cfg.prior, cfg.setup.delta);
  if (!y0_reference) return res;

  require(y0_reference->size() == 1 && y0_reference->front().poly_degree == 0, ErrorKind::configuration,
          "reference must be a single pure mode");
  const Mode& m = y0_reference->front();
  res.has_reference = true;
  res.omega_true = m.freq;
  res.z_true = std::exp(-kI * m.freq.value() * cfg.setup.delta);

  SampledSignal r;
  if (y.exact_modes) {
    r = y;
    std::vector<Mode> diff = *y.exact_modes;
    Mode neg = m;
    neg.amp = -neg.amp;
    diff.push_back(neg);
    r.exact_modes = diff;
    for (std::size_t k = 0; k < r.size(); ++k) r.values[k] -= m.eval(r.time(k));
  } else {
    r = subtract_modes(y, *y0_reference);
  }
  const auto sz = residual_sizes(*y0_reference, r, cfg.setup);
  res.eps0 = sz.eps0;
  res.eps1 = sz.eps1;
  res.eps = sz.eps;
  const double zabs = std::abs(res.z_true);
  if (res.eps0 <= 0.25) res.bound_z = stability_bound(res.eps0, res.eps1);
  if (res.eps <= 0.125) res.bound_z_crude = crude_stability_bound(res.eps);
  res.bound_omega = omega_error_bound(res.eps, res.z_true, cfg.setup.delta);
  res.hypotheses_ok.eps_small = res.eps <= std::min(0.125, zabs / 20.0);
  res.hypotheses_ok.branch_hyp = branch_hypotheses(res.z_true, res.z_hat, cfg.prior, cfg.setup.delta);
  if (cfg.c_sep) res.hypotheses_ok.disk_hyp = res.eps <= (*cfg.c_sep / 40.0) * cfg.setup.delta * zabs;
  return res;
}

struct EpsilonBudget {
  double eps_tail_bound = 0.0;
  double eps_meas_bound = 0.0;
  double eps_bound = 0.0;
  double energy_lower = 0.0;  ///< sqrt of the mode-energy lower bound
};

/// A priori residual budget from the tail envelope at T0 and an L2 bound on the noise.
inline EpsilonBudget epsilon_budget(cplx amp, ComplexFrequency freq, const TailSpec& tail, double noise_l2,
                                    const ObservationSetup& setup, double detector_norm = 1.0, double data_norm = 1.0) {
  if (!(freq.im < 0.0)) fail(ErrorKind::configuration, "epsilon budget needs strictly positive damping");
  require(setup.t_len > 3.0 * setup.delta, ErrorKind::configuration, "epsilon budget needs T > 3*delta");
  tail.validate();
  EpsilonBudget b;
  b.energy_lower = std::sqrt(mode_energy_lower_bound(amp, freq, setup));
  if (!(b.energy_lower > 0.0)) fail(ErrorKind::detectability, "mode amplitude is zero");
  b.eps_tail_bound = detector_norm * data_norm * tail.envelope(setup.t0) * std::sqrt(setup.t_len) / b.energy_lower;
  b.eps_meas_bound = noise_l2 / b.energy_lower;
  b.eps_bound = b.eps_tail_bound + b.eps_meas_bound;
  return b;
}

struct DiskCheck {
  bool in_disk = false;                  ///< |omega_hat - prior| <= c_sep/2
  std::optional<bool> sufficient_holds;  ///< eps <= (c_sep/40) delta |z|, when eps and z are given
};

inline DiskCheck disk_check(ComplexFrequency omega_hat, ComplexFrequency prior, double c_sep,
                            std::optional<double> eps = std::nullopt, std::optional<cplx> z = std::nullopt,
                            double delta = 1.0) {
  DiskCheck d;
  d.in_disk = std::abs(omega_hat.value() - prior.value()) <= 0.5 * c_sep;
  if (eps && z) d.sufficient_holds = *eps <= (c_sep / 40.0) * delta * std::abs(*z);
  return d;
}

}  // namespace ringlab
