#pragma once

#include <ringlab/error.hpp>
#include <ringlab/quadrature.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

namespace ringlab {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

/// Complex angular frequency; im <= 0 for decaying modes.
struct ComplexFrequency {
  double re = 0.0;
  double im = 0.0;

  constexpr cplx value() const { return {re, im}; }
  static constexpr ComplexFrequency from(cplx w) { return {w.real(), w.imag()}; }
  friend constexpr bool operator==(const ComplexFrequency&, const ComplexFrequency&) = default;
};

/// amp * t^poly_degree * exp(-i omega t)
struct Mode {
  ComplexFrequency freq;
  cplx amp{1.0, 0.0};
  int poly_degree = 0;

  cplx eval(double t) const {
    cplx v = amp * std::exp(-kI * freq.value() * t);
    if (poly_degree > 0) v *= std::pow(t, poly_degree);
    return v;
  }
};

/// rho(t) = c_tail * exp(-nu t) * (1+t)^(-m) + leak
struct TailSpec {
  double c_tail = 0.0;
  double nu = 1.0;
  int m = 0;
  double leak = 0.0;

  double envelope(double t) const { return c_tail * std::exp(-nu * t) * std::pow(1.0 + t, -m) + leak; }
  bool is_zero() const { return c_tail == 0.0 && leak == 0.0; }
  void validate() const {
    require(c_tail >= 0.0, ErrorKind::configuration, "tail c_tail must be >= 0");
    require(nu > 0.0, ErrorKind::configuration, "tail nu must be > 0");
    require(m >= 0, ErrorKind::configuration, "tail m must be >= 0");
    require(leak >= 0.0, ErrorKind::configuration, "tail leak must be >= 0");
  }
};

struct Harmonic {
  double c = 0.0;
  double mu = 0.0;
  double phi = 0.0;
};

struct HarmonicNoise {
  std::vector<Harmonic> terms;
};

/// Piecewise-constant LCG stream. Sample k (covering [origin + k*step,
/// origin + (k+1)*step)) uses the state after k+1 updates of `seed`.
/// A zero step means "bind to the sampling grid" and is filled in by sample().
struct LcgNoise {
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  double step = 0.0;
  double origin = 0.0;
};

using NoiseSpec = std::variant<std::monostate, HarmonicNoise, LcgNoise>;

namespace lcg {

inline constexpr std::uint64_t kMul = 6364136223846793005ULL;
inline constexpr std::uint64_t kInc = 1442695040888963407ULL;

/// State after n updates, by squaring the affine map x -> kMul*x + kInc.
constexpr std::uint64_t advance(std::uint64_t x, std::uint64_t n) {
  std::uint64_t acc_mul = 1, acc_inc = 0;
  std::uint64_t cur_mul = kMul, cur_inc = kInc;
  while (n > 0) {
    if (n & 1U) {
      acc_mul = acc_mul * cur_mul;
      acc_inc = acc_inc * cur_mul + cur_inc;
    }
    cur_inc = (cur_mul + 1) * cur_inc;
    cur_mul = cur_mul * cur_mul;
    n >>= 1U;
  }
  return acc_mul * x + acc_inc;
}

inline double to_unit(std::uint64_t x) { return static_cast<double>(x) * 0x1p-64; }

inline double sample(const LcgNoise& s, std::uint64_t k) {
  return s.amplitude * (2.0 * to_unit(advance(s.seed, k + 1)) - 1.0);
}

}  // namespace lcg

inline double eval_noise(const NoiseSpec& noise, double t) {
  if (const auto* h = std::get_if<HarmonicNoise>(&noise)) {
    double s = 0.0;
    for (const auto& term : h->terms) s += term.c * std::cos(term.mu * t + term.phi);
    return s;
  }
  if (const auto* g = std::get_if<LcgNoise>(&noise)) {
    require(g->step > 0.0, ErrorKind::configuration, "LCG noise needs a positive step");
    double u = (t - g->origin) / g->step;
    auto k = static_cast<std::int64_t>(std::floor(u + 1e-9));
    if (k < 0) k = 0;
    return lcg::sample(*g, static_cast<std::uint64_t>(k));
  }
  return 0.0;
}

inline bool noise_is_zero(const NoiseSpec& noise) {
  if (const auto* h = std::get_if<HarmonicNoise>(&noise)) {
    for (const auto& term : h->terms)
      if (term.c != 0.0) return false;
    return true;
  }
  if (const auto* g = std::get_if<LcgNoise>(&noise)) return g->amplitude == 0.0;
  return true;
}

/// Pointwise bound sup|eta| used for L2 budgets.
inline double noise_sup_bound(const NoiseSpec& noise) {
  if (const auto* h = std::get_if<HarmonicNoise>(&noise)) {
    double s = 0.0;
    for (const auto& term : h->terms) s += std::abs(term.c);
    return s;
  }
  if (const auto* g = std::get_if<LcgNoise>(&noise)) return std::abs(g->amplitude);
  return 0.0;
}

enum class Taper { rectangular, raised_cosine };

struct ObservationSetup {
  double t0 = 0.0;
  double t_len = 10.0;
  double delta = 1.0;
  double dt = 0.01;
  Taper taper = Taper::raised_cosine;

  static long steps_of(double x, double dt, const char* what) {
    double r = x / dt;
    long k = std::lround(r);
    if (k < 0 || std::abs(r - static_cast<double>(k)) > 1e-9 * std::max(1.0, std::abs(r)))
      fail(ErrorKind::configuration, std::string(what) + " is not an integer multiple of dt");
    return k;
  }

  void validate() const {
    require(std::isfinite(t0) && t0 >= 0.0, ErrorKind::configuration, "t0 must be >= 0");
    require(std::isfinite(t_len) && t_len > 0.0, ErrorKind::configuration, "T must be > 0");
    require(delta > 0.0 && delta < t_len, ErrorKind::configuration, "need 0 < delta < T");
    require(dt > 0.0, ErrorKind::configuration, "dt must be > 0");
    require(t_len + 1e-12 * t_len >= 3.0 * delta, ErrorKind::configuration, "need T >= 3*delta");
    steps_of(delta, dt, "delta");
    long n = steps_of(t_len, dt, "T");
    require(n + 1 >= 4, ErrorKind::configuration, "grid has fewer than 4 samples");
  }

  long shift_steps() const { return steps_of(delta, dt, "delta"); }
  long total_steps() const { return steps_of(t_len, dt, "T"); }
  std::size_t sample_count() const { return static_cast<std::size_t>(total_steps() + 1); }
  double support_end() const { return t0 + t_len - delta; }
  double plateau_begin() const { return t0 + delta; }
  double plateau_end() const { return t0 + t_len - 2.0 * delta; }
};

/// Uniformly sampled complex signal. When `exact_modes` is set the values are
/// an exact pure-exponential mode sum and inner products use closed forms.
struct SampledSignal {
  double t_start = 0.0;
  double dt = 1.0;
  std::vector<cplx> values;
  std::optional<std::vector<Mode>> exact_modes;

  std::size_t size() const { return values.size(); }
  double t_end() const { return t_start + dt * static_cast<double>(values.size() - 1); }
  double time(std::size_t k) const { return t_start + dt * static_cast<double>(k); }
};

using TimeFunction = std::function<cplx(double)>;

inline cplx eval_modes(const std::vector<Mode>& modes, double t) {
  cplx s = 0.0;
  for (const auto& m : modes) s += m.eval(t);
  return s;
}

inline cplx eval_scene(const std::vector<Mode>& modes, const TailSpec& tail, const NoiseSpec& noise, double t) {
  return eval_modes(modes, t) + tail.envelope(t) + eval_noise(noise, t);
}

/// Samples on an arbitrary uniform grid; no setup checks and no closed-form tag.
inline SampledSignal sample_grid(const std::vector<Mode>& modes, const TailSpec& tail, const NoiseSpec& noise,
                                 double t_start, double dt, std::size_t n) {
  SampledSignal s;
  s.t_start = t_start;
  s.dt = dt;
  s.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) s.values[k] = eval_scene(modes, tail, noise, t_start + dt * double(k));
  return s;
}

inline bool all_pure(const std::vector<Mode>& modes) {
  for (const auto& m : modes)
    if (m.poly_degree != 0) return false;
  return true;
}

inline SampledSignal sample(const std::vector<Mode>& modes, const TailSpec& tail, const NoiseSpec& noise,
                            const ObservationSetup& setup) {
  setup.validate();
  tail.validate();
  NoiseSpec bound = noise;
  if (auto* g = std::get_if<LcgNoise>(&bound); g && g->step == 0.0) {
    g->step = setup.dt;
    g->origin = setup.t0;
  }
  SampledSignal s = sample_grid(modes, tail, bound, setup.t0, setup.dt, setup.sample_count());
  if (tail.is_zero() && noise_is_zero(noise) && all_pure(modes)) s.exact_modes = modes;
  return s;
}

inline double weight_eval(const ObservationSetup& setup, double t) {
  const double a = setup.t0, p0 = setup.plateau_begin(), p1 = setup.plateau_end(), b = setup.support_end();
  if (t < a || t > b) return 0.0;
  if (t >= p0 && t <= p1) return 1.0;
  if (setup.taper == Taper::rectangular) return 0.0;
  constexpr double pi = std::numbers::pi;
  if (t < p0) return 0.5 * (1.0 - std::cos(pi * (t - a) / setup.delta));
  return 0.5 * (1.0 + std::cos(pi * (t - p1) / setup.delta));
}

namespace detail {

/// (e^x - 1)/x without cancellation for small |x|.
inline cplx phi1(cplx x) {
  if (std::abs(x) < 0.5) {
    cplx term = 1.0, sum = 1.0;
    for (int k = 1; k < 30; ++k) {
      term *= x / double(k + 1);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return (std::exp(x) - 1.0) / x;
}

/// Integral of exp(gamma t) over [a, b].
inline cplx exp_integral(cplx gamma, double a, double b) {
  double len = b - a;
  if (len <= 0.0) return 0.0;
  return std::exp(gamma * a) * len * phi1(gamma * len);
}

/// Integral of w(t) exp(gamma t) over the weight support.
inline cplx weighted_exp_integral(cplx gamma, const ObservationSetup& s) {
  cplx v = exp_integral(gamma, s.plateau_begin(), s.plateau_end());
  if (s.taper == Taper::rectangular) return v;
  const cplx k = kI * std::numbers::pi / s.delta;
  const double a = s.t0, p1 = s.plateau_end();
  // rise: 1/2 - (e^{k(t-a)} + e^{-k(t-a)})/4
  v += 0.5 * exp_integral(gamma, a, a + s.delta);
  v -= 0.25 * std::exp(-k * a) * exp_integral(gamma + k, a, a + s.delta);
  v -= 0.25 * std::exp(k * a) * exp_integral(gamma - k, a, a + s.delta);
  // fall: 1/2 + (e^{k(t-p1)} + e^{-k(t-p1)})/4
  v += 0.5 * exp_integral(gamma, p1, p1 + s.delta);
  v += 0.25 * std::exp(-k * p1) * exp_integral(gamma + k, p1, p1 + s.delta);
  v += 0.25 * std::exp(k * p1) * exp_integral(gamma - k, p1, p1 + s.delta);
  return v;
}

inline cplx pair_gamma(const Mode& f, const Mode& g) {
  return -kI * f.freq.value() + kI * std::conj(g.freq.value());
}

/// Trapezoid weights (times w) on the nodes t0 + k dt, k = 0..K, of the weight support.
inline std::vector<double> weighted_trapezoid(const ObservationSetup& s) {
  const long K = s.total_steps() - s.shift_steps();
  std::vector<double> q(static_cast<std::size_t>(K + 1), 0.0);
  if (s.taper == Taper::rectangular) {
    const long k0 = s.shift_steps(), k1 = s.total_steps() - 2 * s.shift_steps();
    for (long k = k0; k <= k1; ++k) q[std::size_t(k)] = (k == k0 || k == k1) ? 0.5 * s.dt : s.dt;
    if (k0 == k1) q[std::size_t(k0)] = 0.0;
    return q;
  }
  for (long k = 0; k <= K; ++k) {
    double w = weight_eval(s, s.t0 + s.dt * double(k));
    q[std::size_t(k)] = w * ((k == 0 || k == K) ? 0.5 * s.dt : s.dt);
  }
  return q;
}

inline std::size_t grid_offset(const SampledSignal& f, const ObservationSetup& s, std::size_t needed) {
  require(std::abs(f.dt - s.dt) <= 1e-12 * s.dt, ErrorKind::configuration, "signal grid step differs from setup dt");
  double r = (s.t0 - f.t_start) / s.dt;
  long off = std::lround(r);
  require(off >= 0 && std::abs(r - double(off)) <= 1e-9 * std::max(1.0, std::abs(r)), ErrorKind::configuration,
          "signal grid is not aligned with the observation window");
  require(std::size_t(off) + needed <= f.size(), ErrorKind::configuration,
          "signal grid does not cover the integration interval");
  return std::size_t(off);
}

}  // namespace detail

/// Closed-form weighted inner product of two pure-exponential mode sums.
inline cplx weighted_inner_modes(const std::vector<Mode>& f, const std::vector<Mode>& g,
                                 const ObservationSetup& setup) {
  require(all_pure(f) && all_pure(g), ErrorKind::configuration, "closed form needs pure exponentials");
  cplx s = 0.0;
  for (const auto& a : f)
    for (const auto& b : g) s += a.amp * std::conj(b.amp) * detail::weighted_exp_integral(detail::pair_gamma(a, b), setup);
  return s;
}

/// Adaptive-quadrature weighted inner product with breakpoints at the ramp ends.
inline cplx weighted_inner_quad(const TimeFunction& f, const TimeFunction& g, const ObservationSetup& setup,
                                const QuadOptions& opt = {}) {
  const double br[] = {setup.t0, setup.plateau_begin(), setup.plateau_end(), setup.support_end()};
  return integrate_piecewise(
      [&](double t) { return weight_eval(setup, t) * f(t) * std::conj(g(t)); }, br, opt);
}

/// Weighted inner product <f, g>_w; trapezoid rule on sampled data,
/// closed form when both signals are tagged exact mode sums.
inline cplx weighted_inner(const SampledSignal& f, const SampledSignal& g, const ObservationSetup& setup) {
  setup.validate();
  if (f.exact_modes && g.exact_modes) return weighted_inner_modes(*f.exact_modes, *g.exact_modes, setup);
  const auto q = detail::weighted_trapezoid(setup);
  const std::size_t of = detail::grid_offset(f, setup, q.size());
  const std::size_t og = detail::grid_offset(g, setup, q.size());
  cplx s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k)
    if (q[k] != 0.0) s += q[k] * f.values[of + k] * std::conj(g.values[og + k]);
  return s;
}

inline double weighted_norm(const SampledSignal& f, const ObservationSetup& setup) {
  return std::sqrt(std::max(0.0, weighted_inner(f, f, setup).real()));
}

inline double weighted_norm_modes(const std::vector<Mode>& f, const ObservationSetup& setup) {
  return std::sqrt(std::max(0.0, weighted_inner_modes(f, f, setup).real()));
}

/// (S_delta f)(t) = f(t + delta); the grid keeps its start and loses delta at the end.
inline SampledSignal shift(const SampledSignal& f, double delta) {
  const long k = ObservationSetup::steps_of(delta, f.dt, "shift");
  require(std::size_t(k) < f.size(), ErrorKind::configuration, "shift longer than the signal");
  SampledSignal out;
  out.t_start = f.t_start;
  out.dt = f.dt;
  out.values.assign(f.values.begin() + k, f.values.end());
  if (f.exact_modes) {
    std::vector<Mode> m = *f.exact_modes;
    for (auto& mode : m) mode.amp *= std::exp(-kI * mode.freq.value() * delta);
    out.exact_modes = std::move(m);
  }
  return out;
}

/// |a|^2 * integral of e^{2 Im(omega) t} over the weight plateau.
inline double mode_energy_lower_bound(cplx amp, ComplexFrequency freq, const ObservationSetup& setup) {
  const double b = freq.im;
  const double a1 = setup.plateau_begin();
  const double len = setup.plateau_end() - a1;
  if (len <= 0.0) return 0.0;
  const double x = 2.0 * b * len;
  const double factor = (x == 0.0) ? len : std::expm1(x) / (2.0 * b);
  return std::norm(amp) * std::exp(2.0 * b * a1) * factor;
}

/// |a| e^{Im(omega)(T0+T-2 delta)} sqrt(T - 3 delta), a lower bound on the weighted norm.
inline double mode_energy_crude_bound(cplx amp, ComplexFrequency freq, const ObservationSetup& setup) {
  const double len = setup.t_len - 3.0 * setup.delta;
  require(len > 0.0, ErrorKind::configuration, "crude energy bound needs T > 3*delta");
  return std::abs(amp) * std::exp(freq.im * setup.plateau_end()) * std::sqrt(len);
}

/// Unweighted L2 norm over [T0, T0+T].
inline double residual_l2(const SampledSignal& r, const ObservationSetup& setup) {
  setup.validate();
  if (r.exact_modes) {
    cplx s = 0.0;
    for (const auto& a : *r.exact_modes)
      for (const auto& b : *r.exact_modes)
        s += a.amp * std::conj(b.amp) *
             detail::exp_integral(detail::pair_gamma(a, b), setup.t0, setup.t0 + setup.t_len);
    return std::sqrt(std::max(0.0, s.real()));
  }
  const std::size_t n = setup.sample_count();
  const std::size_t off = detail::grid_offset(r, setup, n);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double wk = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    s += wk * std::norm(r.values[off + k]);
  }
  return std::sqrt(s * setup.dt);
}

inline double residual_l2_quad(const TimeFunction& r, const ObservationSetup& setup, const QuadOptions& opt = {}) {
  const double br[] = {setup.t0, setup.t0 + setup.t_len};
  double v = integrate_piecewise([&](double t) { return std::norm(r(t)); }, br, opt);
  return std::sqrt(std::max(0.0, v));
}

/// Pointwise difference y - reference on the grid of y.
inline SampledSignal subtract_modes(const SampledSignal& y, const std::vector<Mode>& ref) {
  SampledSignal r;
  r.t_start = y.t_start;
  r.dt = y.dt;
  r.values.resize(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) r.values[k] = y.values[k] - eval_modes(ref, y.time(k));
  return r;
}

}  // namespace ringlab
