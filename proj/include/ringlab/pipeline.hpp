#pragma once

#include <ringlab/analytic_window.hpp>
#include <ringlab/extractor.hpp>
#include <ringlab/paramap.hpp>
#include <ringlab/prony2.hpp>
#include <ringlab/signal_model.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace ringlab {

enum class WindowPath { modal, fd };
enum class PriorSource { exact, offset };

/// Analytic window over the sector's overtone pseudopoles j = 0..n. In the
/// modal path the tail and noise describe the already-windowed remainder; the
/// fd path applies g(i d/dt) to the sampled scene.
struct WindowConfig {
  bool enabled = false;
  int n = 1;
  int m0 = -1;  ///< negative selects n + 2
  WindowPath path = WindowPath::modal;
  int stencil_order = 8;
  PriorSource prior = PriorSource::exact;
  cplx prior_offset{0.0};
};

struct InversionConfig {
  DataMode mode = DataMode::two_param;
  ParameterBox box;
  std::optional<ParameterPoint> guess;  ///< box center when absent
  int grid_n = 9;
  double tol = 1e-12;
};

enum class SweepAxis { T0, T, Delta, ell, noise_amp, separation };

struct SweepConfig {
  SweepAxis axis = SweepAxis::T0;
  std::vector<double> values;
};

/// Defaults are the canonical scene: ell = 100, T0 = 4, T = 10, Delta = 1,
/// tail c = 1, nu = 0.5, m = 2.
struct ScenarioConfig {
  LatticeModel lattice;
  ParameterPoint p_true{1.0, 0.15, 0.01};
  cplx amp_plus{1.0};
  cplx amp_minus{1.0};
  TailSpec tail{1.0, 0.5, 2, 0.0};
  NoiseSpec noise;
  ObservationSetup observation{4.0, 10.0, 1.0, 0.01, Taper::raised_cosine};
  WindowConfig window;
  InversionConfig inversion;
  std::optional<SweepConfig> sweep;

  void validate() const {
    lattice.validate();
    observation.validate();
    tail.validate();
    require(observation.t_len > 3.0 * observation.delta, ErrorKind::configuration, "need T > 3*Delta");
    require(p_true.M > 0.0 && p_true.Lambda >= 0.0 && 9.0 * p_true.Lambda * p_true.M * p_true.M < 1.0,
            ErrorKind::configuration, "p_true violates 9 Lambda M^2 < 1");
    require(std::abs(amp_plus) > 0.0 && std::abs(amp_minus) > 0.0, ErrorKind::configuration, "amplitudes must be nonzero");
    inversion.box.validate(inversion.mode);
    require(inversion.box.contains(p_true, inversion.mode), ErrorKind::configuration, "p_true outside the box");
    if (inversion.guess)
      require(inversion.box.contains(*inversion.guess, inversion.mode), ErrorKind::configuration, "guess outside the box");
    require(inversion.grid_n >= 2, ErrorKind::configuration, "inversion grid_n must be >= 2");
    require(inversion.tol > 0.0, ErrorKind::configuration, "inversion tol must be > 0");
    if (inversion.mode == DataMode::three_param)
      require(lattice.lam_mode != LamMode::omega_ph, ErrorKind::configuration,
              "three-parameter mode needs lam mode mass_only or constant (omega_ph duplicates U)");
    if (window.enabled) {
      require(window.n >= lattice.n, ErrorKind::configuration, "window must contain the target overtone");
      require(window.stencil_order >= 2 && window.stencil_order % 2 == 0, ErrorKind::configuration,
              "stencil order must be even");
    }
    if (sweep) require(!sweep->values.empty(), ErrorKind::configuration, "sweep values are empty");
  }
};

inline ParameterPoint box_center(const ParameterBox& b) {
  return {0.5 * (b.M_lo + b.M_hi), 0.5 * (b.a_lo + b.a_hi), 0.5 * (b.L_lo + b.L_hi)};
}

/// One certified inequality lhs <= rhs, asserted only when `hypotheses` holds.
struct Check {
  std::string name;
  bool hypotheses = false;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  bool violated() const { return hypotheses && !holds; }
};

/// Rounding slack on the frequency-level checks.
inline constexpr double kCheckAbsSlack = 1e-13;
inline constexpr double kCheckRelSlack = 1e-12;

inline Check make_check(std::string name, bool hyp, double lhs, double rhs, double abs_slack = kCheckAbsSlack) {
  return {std::move(name), hyp, lhs, rhs, lhs <= rhs * (1.0 + kCheckRelSlack) + abs_slack};
}

struct SectorOutcome {
  int sign = 1;
  cplx omega_true;
  cplx omega_prior;
  cplx amp_eff;
  ExtractionResult ext;
  std::optional<EpsilonBudget> budget;
  double z_err = 0.0;
  double omega_err = 0.0;
};

struct ScenarioResult {
  int index = 0;
  double sweep_value = std::numeric_limits<double>::quiet_NaN();
  ScenarioConfig cfg;
  bool failed = false;
  std::optional<ErrorKind> error_kind;
  std::string error;
  SectorOutcome plus, minus;
  Observables G_true, G_hat;
  double data_bound = 0.0;
  ParameterPoint p_hat;
  int newton_iterations = 0;
  InverseConstants inverse;
  BiasReport bias;
  std::string eps_source;  ///< "budget" or "measured"
  std::vector<Check> checks;

  bool violated() const {
    return failed || std::any_of(checks.begin(), checks.end(), [](const Check& c) { return c.violated(); });
  }
};

struct RunReport {
  std::vector<ScenarioResult> rows;
  double prony_c_hat = kPronyConditioningC;
  double prony_c0 = kPronySmallnessC0;

  /// 0: every asserted inequality holds; 1: a violation or failed row; 2: configuration error.
  int exit_code() const {
    for (const auto& r : rows)
      if (r.error_kind == ErrorKind::configuration) return 2;
    for (const auto& r : rows)
      if (r.violated()) return 1;
    return 0;
  }
};

namespace detail {

inline PseudopoleSet prior_nodes(const ScenarioConfig& c, int sign) {
  std::vector<cplx> nodes;
  for (int j = 0; j <= c.window.n; ++j) {
    cplx w = c.lattice.pseudopole(j, sign, c.p_true);
    if (c.window.prior == PriorSource::offset) w += c.window.prior_offset;
    nodes.push_back(w);
  }
  return PseudopoleSet(nodes);
}

inline double noise_l2_bound(const NoiseSpec& noise, const ObservationSetup& s) {
  return noise_sup_bound(noise) * std::sqrt(s.t_len);
}

inline SectorOutcome run_sector(const ScenarioConfig& c, int sign) {
  SectorOutcome out;
  out.sign = sign;
  const int n = c.lattice.n;
  const cplx amp = sign > 0 ? c.amp_plus : c.amp_minus;
  out.omega_true = c.lattice.pole(n, sign, c.p_true);
  out.omega_prior = c.lattice.pseudopole(n, sign, c.p_true);
  if (c.window.prior == PriorSource::offset) out.omega_prior += c.window.prior_offset;
  out.amp_eff = amp;

  const ObservationSetup& s = c.observation;
  std::optional<WindowPolynomial> g;
  if (c.window.enabled) {
    g.emplace(prior_nodes(c, sign), n, c.window.m0 < 0 ? c.window.n + 2 : c.window.m0);
    out.amp_eff = amp * (*g)(out.omega_true);
  }
  const Mode mode{ComplexFrequency::from(out.omega_true), out.amp_eff, 0};

  SampledSignal y;
  if (g && c.window.path == WindowPath::fd) {
    const int M = fd_half_width(*g, c.window.stencil_order);
    s.validate();
    NoiseSpec noise = c.noise;
    if (auto* l = std::get_if<LcgNoise>(&noise); l && l->step == 0.0) {
      l->step = s.dt;
      l->origin = s.t0;
    }
    const Mode raw{ComplexFrequency::from(out.omega_true), amp, 0};
    const auto y_raw = sample_grid({raw}, c.tail, noise, s.t0 - M * s.dt, s.dt, s.sample_count() + 2 * std::size_t(M));
    y = apply_window_fd(y_raw, *g, c.window.stencil_order);
  } else {
    y = sample({mode}, c.tail, c.noise, s);
  }
  ExtractionConfig ec;
  ec.setup = s;
  ec.prior = ComplexFrequency::from(out.omega_prior);
  out.ext = extract(y, ec, std::vector<Mode>{mode});
  out.z_err = std::abs(out.ext.z_hat - out.ext.z_true);
  out.omega_err = std::abs(out.ext.omega_hat.value() - out.omega_true);

  const bool budget_ok = !c.window.enabled || c.window.path == WindowPath::modal;
  if (budget_ok && out.omega_true.imag() < 0.0)
    out.budget = epsilon_budget(out.amp_eff, mode.freq, c.tail, noise_l2_bound(c.noise, s), s);
  return out;
}

inline void sector_checks(const SectorOutcome& o, double delta, std::vector<Check>& checks) {
  const std::string tag = o.sign > 0 ? "+" : "-";
  const auto& e = o.ext;
  checks.push_back(make_check("z_stability" + tag, e.eps0 <= 0.25, o.z_err, e.eps0 <= 0.25 ? e.bound_z : 0.0));
  checks.push_back(make_check("z_crude" + tag, e.eps <= 0.125, o.z_err, 3.0 * e.eps));
  checks.push_back(make_check("omega" + tag, e.hypotheses_ok.eps_small && e.hypotheses_ok.branch_hyp, o.omega_err,
                              omega_error_bound(e.eps, e.z_true, delta)));
  if (o.budget) checks.push_back(make_check("eps_budget" + tag, true, e.eps, o.budget->eps_bound));
}

inline double bias_bound(DataMode mode, double ep, double em, double zp, double zm, double delta, int ell, int n,
                         double C) {
  return mode == DataMode::two_param ? bias_bound_2p(ep, em, zp, zm, delta, ell, C)
                                     : bias_bound_3p(ep, em, zp, zm, delta, ell, n, C);
}

inline double param_distance(const ParameterPoint& a, const ParameterPoint& b, DataMode m) {
  return (to_vector(a, m) - to_vector(b, m)).norm();
}

inline void run_scenario(ScenarioResult& r) {
  const ScenarioConfig& c = r.cfg;
  c.validate();
  const DataMode mode = c.inversion.mode;
  r.plus = run_sector(c, 1);
  r.minus = run_sector(c, -1);
  const double delta = c.observation.delta;
  sector_checks(r.plus, delta, r.checks);
  sector_checks(r.minus, delta, r.checks);

  const int ell = c.lattice.ell, n = c.lattice.n;
  r.G_true = observables(r.plus.omega_true, r.minus.omega_true, ell, n);
  r.G_hat = estimated_data(r.plus.ext.omega_hat.value(), r.minus.ext.omega_hat.value(), ell, n);
  const cplx dp = r.plus.ext.omega_hat.value() - r.plus.omega_true;
  const cplx dm = r.minus.ext.omega_hat.value() - r.minus.omega_true;
  r.bias.delta_omega_plus = dp;
  r.bias.delta_omega_minus = dm;
  r.bias.data_err = (r.G_hat.vec(mode) - r.G_true.vec(mode)).norm();
  r.data_bound = mode == DataMode::two_param ? data_error_bound(dp, dm, ell) : data_error_bound_3p(dp, dm, ell, n);
  r.checks.push_back(make_check("data_error", true, r.bias.data_err, r.data_bound));

  r.inverse = inverse_constants(c.lattice, c.inversion.box, c.inversion.grid_n, mode, c.p_true.Lambda);
  ParameterPoint guess = c.inversion.guess.value_or(box_center(c.inversion.box));
  if (mode == DataMode::two_param) guess.Lambda = c.p_true.Lambda;
  const auto inv = invert_data(c.lattice, r.G_hat.vec(mode), guess, mode, c.inversion.box, c.inversion.tol);
  r.p_hat = inv.p;
  r.newton_iterations = inv.iterations;
  r.bias.param_err = param_distance(r.p_hat, c.p_true, mode);

  const double zp = std::abs(r.plus.ext.z_true), zm = std::abs(r.minus.ext.z_true);
  const double C = r.inverse.C_star;
  auto& k = r.bias.constants;
  k = {C, r.inverse.c_star, ell, delta, zp, zm};
  // Newton stops at residual tol; the inverse Lipschitz constant turns that into a parameter slack.
  const double newton_slack = 10.0 * C * c.inversion.tol;

  const double ep = r.plus.ext.eps, em = r.minus.ext.eps;
  const bool meas_hyp = bias_hypothesis(ep, zp) && bias_hypothesis(em, zm);
  const double meas_bound = bias_bound(mode, ep, em, zp, zm, delta, ell, n, C);
  r.checks.push_back(make_check("bias_measured_eps", meas_hyp, r.bias.param_err, meas_bound, newton_slack));

  double bound = meas_bound;
  r.eps_source = "measured";
  r.bias.bound_tail = std::numeric_limits<double>::quiet_NaN();
  r.bias.bound_meas = std::numeric_limits<double>::quiet_NaN();
  if (r.plus.budget && r.minus.budget) {
    const auto &bp = *r.plus.budget, &bm = *r.minus.budget;
    const bool hyp = bias_hypothesis(bp.eps_bound, zp) && bias_hypothesis(bm.eps_bound, zm);
    bound = bias_bound(mode, bp.eps_bound, bm.eps_bound, zp, zm, delta, ell, n, C);
    r.bias.bound_tail = bias_bound(mode, bp.eps_tail_bound, bm.eps_tail_bound, zp, zm, delta, ell, n, C);
    r.bias.bound_meas = bias_bound(mode, bp.eps_meas_bound, bm.eps_meas_bound, zp, zm, delta, ell, n, C);
    r.eps_source = "budget";
    r.checks.push_back(make_check("bias_budget_eps", hyp, r.bias.param_err, bound, newton_slack));
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.bias.bound_2p = mode == DataMode::two_param ? bound : nan;
  r.bias.bound_3p = mode == DataMode::three_param ? bound : nan;
}

inline void run_row(ScenarioResult& r) {
  try {
    run_scenario(r);
  } catch (const Error& e) {
    r.failed = true;
    r.error_kind = e.kind();
    r.error = e.what();
  }
}

}  // namespace detail

inline void set_noise_amplitude(NoiseSpec& noise, double v) {
  auto* l = std::get_if<LcgNoise>(&noise);
  if (!l) fail(ErrorKind::configuration, "noise_amp sweep needs lcg noise");
  l->amplitude = v;
}

/// Copy of `c` with the sweep axis set to v.
inline ScenarioConfig apply_axis(ScenarioConfig c, SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::T0: c.observation.t0 = v; break;
    case SweepAxis::T: c.observation.t_len = v; break;
    case SweepAxis::Delta: c.observation.delta = v; break;
    case SweepAxis::ell:
      require(v >= 1.0 && v == std::floor(v), ErrorKind::configuration, "ell sweep values must be integers >= 1");
      c.lattice.ell = int(v);
      break;
    case SweepAxis::noise_amp: set_noise_amplitude(c.noise, v); break;
    case SweepAxis::separation: c.lattice.kappa = v; break;
  }
  return c;
}

inline RunReport run_pipeline(const ScenarioConfig& cfg) {
  RunReport rep;
  rep.rows.resize(1);
  rep.rows[0].cfg = cfg;
  rep.rows[0].cfg.sweep.reset();
  detail::run_row(rep.rows[0]);
  return rep;
}

/// Runs every sweep point on up to `jobs` threads; rows stay in sweep order.
inline RunReport sweep(const ScenarioConfig& cfg, int jobs = 1) {
  require(cfg.sweep.has_value(), ErrorKind::configuration, "sweep section missing");
  require(jobs >= 1, ErrorKind::configuration, "jobs must be >= 1");
  const auto& sw = *cfg.sweep;
  RunReport rep;
  rep.rows.resize(sw.values.size());
  for (std::size_t i = 0; i < sw.values.size(); ++i) {
    auto& r = rep.rows[i];
    r.index = int(i);
    r.sweep_value = sw.values[i];
    try {
      r.cfg = apply_axis(cfg, sw.axis, sw.values[i]);
      r.cfg.sweep.reset();
    } catch (const Error& e) {
      r.failed = true;
      r.error_kind = e.kind();
      r.error = e.what();
    }
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rep.rows.size(); i = next++)
      if (!rep.rows[i].failed) detail::run_row(rep.rows[i]);
  };
  const std::size_t nthreads = std::min<std::size_t>(std::size_t(jobs), rep.rows.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rep;
}

}  // namespace ringlab
