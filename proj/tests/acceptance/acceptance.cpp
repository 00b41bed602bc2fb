// Acceptance run: one PASS/FAIL line per criterion, then a summary line.
// Exits 0 once every criterion has been evaluated; the verdicts are in the output.

#include <ringlab/analytic_window.hpp>
#include <ringlab/extractor.hpp>
#include <ringlab/merotoy.hpp>
#include <ringlab/paramap.hpp>
#include <ringlab/pipeline.hpp>
#include <ringlab/prony2.hpp>
#include <ringlab/signal_model.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace ringlab;

namespace {

// Rounding slack on certified inequalities.
constexpr double kRel = 1e-12;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Mode mode(cplx w, cplx a = 1.0) { return Mode{ComplexFrequency::from(w), a, 0}; }

cplx random_in_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  return std::polar(radius * std::sqrt(U(rng)), 2.0 * std::numbers::pi * U(rng));
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Randomized one-mode scenes shared by the first two criteria.
struct SceneOutcome {
  ExtractionResult res;
  cplx omega;
  double delta;
};

const std::vector<SceneOutcome>& one_mode_scenes() {
  static const std::vector<SceneOutcome> scenes = [] {
    std::vector<SceneOutcome> out;
    std::mt19937_64 rng(90210);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      ObservationSetup s{2.0 * U(rng), 8.0 + 4.0 * U(rng), 0.5 + U(rng), 0.0,
                         trial % 2 ? Taper::rectangular : Taper::raised_cosine};
      s.dt = s.delta / 50.0;
      s.t_len = std::round(s.t_len / s.dt) * s.dt;
      const cplx w{6 * (U(rng) - 0.5), -0.3 * U(rng)};
      std::vector<Mode> y0{mode(w, std::polar(0.5 + U(rng), 6.28 * U(rng)))};
      TailSpec tail{0.5 * U(rng), 0.2 + U(rng), int(3 * U(rng)), 0.0};
      NoiseSpec noise = LcgNoise{std::uint64_t(trial) * 31 + 5, 0.05 * U(rng), 0.0, 0.0};
      const auto y = sample(y0, tail, noise, s);
      ExtractionConfig cfg{s, ComplexFrequency::from(w + cplx(0.05 * U(rng), 0.0)), 0.0, {}};
      out.push_back({extract(y, cfg, y0), w, s.delta});
    }
    return out;
  }();
  return scenes;
}

Verdict rayleigh_stability() {
  int eligible = 0, violations = 0;
  for (const auto& sc : one_mode_scenes()) {
    const auto& r = sc.res;
    if (!(r.eps <= 0.125)) continue;
    ++eligible;
    const double err = std::abs(r.z_hat - r.z_true);
    violations += err > 3.0 * r.eps * (1 + kRel);
    violations += err > stability_bound(r.eps0, r.eps1) * (1 + kRel);
  }
  return {eligible > 0 && violations == 0, fmt("scenes=1000 eligible=%d violations=%d", eligible, violations)};
}

Verdict frequency_extraction() {
  int eligible = 0, violations = 0;
  double worst = 0.0;
  for (const auto& sc : one_mode_scenes()) {
    const auto& r = sc.res;
    const double zabs = std::abs(r.z_true);
    if (!(r.eps <= std::min(0.125, zabs / 20.0))) continue;
    ++eligible;
    const double err = std::abs(r.omega_hat.value() - sc.omega);
    const double bound = 10.0 / (sc.delta * zabs) * r.eps;
    violations += err > bound * (1 + kRel);
    if (bound > 0) worst = std::max(worst, err / bound);
  }
  return {eligible > 0 && violations == 0,
          fmt("eligible=%d violations=%d worst_ratio=%.3f", eligible, violations, worst)};
}

Verdict pure_mode_exactness() {
  // closed form
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_closed = 0.0;
  for (int i = 0; i < 200; ++i) {
    ObservationSetup s{3.0 * U(rng), 10.0, 1.0, 0.01, i % 2 ? Taper::rectangular : Taper::raised_cosine};
    const cplx w{20 * (U(rng) - 0.5), -0.5 * U(rng)};
    const auto y = sample({mode(w, std::polar(0.1 + U(rng), 6.28 * U(rng)))}, {}, {}, s);
    worst_closed = std::max(worst_closed, std::abs(rayleigh_quotient(y, s) - std::exp(-kI * w * s.delta)));
  }
  // Trapezoid path. On the grid S_Delta y = z y holds exactly, so zhat carries
  // no quadrature error; the order is measured on the two inner products it is built from.
  constexpr double kTrapC = 1.0;
  const cplx w{1.0, -0.1};
  std::vector<double> lx, ly;
  bool within_c = true;
  double worst_trap = 0.0;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
    ObservationSetup s{1.0, 10.0, 1.0, dt, Taper::rectangular};
    const auto exact = sample({mode(w)}, {}, {}, s);
    auto y = exact;
    y.exact_modes.reset();
    const double err = std::abs(rayleigh_quotient(y, s) - std::exp(-kI * w * s.delta));
    within_c = within_c && err <= kTrapC * dt * dt;
    worst_trap = std::max(worst_trap, err);
    const double e_num = std::abs(weighted_inner(shift(y, s.delta), y, s) - weighted_inner(shift(exact, s.delta), exact, s));
    const double e_den = std::abs(weighted_inner(y, y, s) - weighted_inner(exact, exact, s));
    lx.push_back(std::log(dt));
    ly.push_back(std::log(std::max(e_num, e_den)));
  }
  const double order = slope(lx, ly);
  const bool pass = worst_closed <= 1e-10 && within_c && std::abs(order - 2.0) <= 0.3;
  return {pass, fmt("closed_form_worst=%.2e trapezoid_zhat_worst=%.2e inner_product_order=%.3f", worst_closed,
                    worst_trap, order)};
}

Verdict hankel_identity() {
  std::mt19937_64 rng(500);
  double worst = 0.0, worst_plain = 0.0;
  for (int i = 0; i < 500; ++i) {
    const cplx a1 = random_in_disk(rng, 2.0), a2 = random_in_disk(rng, 2.0);
    const cplx z1 = random_in_disk(rng, 1.0), z2 = random_in_disk(rng, 1.0);
    const auto y = two_mode_samples(a1, a2, z1, z2);
    const cplx expect = a1 * a2 * (z1 - z2) * (z1 - z2);
    const cplx d0 = hankel_det(y[0], y[1], y[2]);
    // relative to the size of the determinant's summands
    const double scale = std::max({std::abs(expect), std::abs(y[0] * y[2]), std::abs(y[1] * y[1])});
    worst = std::max(worst, std::abs(d0 - expect) / scale);
    worst_plain = std::max(worst_plain, std::abs(d0 - expect) / std::abs(expect));
  }
  return {worst <= 1e-12, fmt("samples=500 worst_rel=%.2e worst_rel_to_|D0|=%.2e", worst, worst_plain)};
}

Verdict prony_conditioning() {
  const double s = prony_slope_probe(1.0, 1.0, 0.5, 0.0, {0.4, 0.2, 0.1, 0.05}, 1e-8);
  const auto cal = prony_calibration_grid();
  const auto val = prony_validation_grid();
  bool disjoint = true;
  for (const auto& v : val)
    for (const auto& c : cal) disjoint = disjoint && !(v.z1 == c.z1 && v.z2 == c.z2 && v.a1 == c.a1 && v.a2 == c.a2);
  const double c_hat = calibrate_conditioning_constant(cal);
  int exceed = 0;
  for (const auto& v : val) exceed += conditioning_ratio(v, 1e-10) > c_hat;
  const bool pass = s >= -3.5 && s <= -2.5 && disjoint && exceed == 0;
  return {pass, fmt("slope=%.3f target=[-3.5,-2.5] C_hat=%.6f validation=%zu exceedances=%d", s, c_hat, val.size(),
                    exceed)};
}

Verdict window_identities() {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_id = 0.0, worst_ratio = 0.0;
  int draws = 0, violations = 0;
  for (int n : {1, 2, 3}) {
    for (int trial = 0; trial < 200; ++trial) {
      // n+1 nodes in a disk of radius n+1, minimal separation normalized to 2
      std::vector<cplx> v;
      for (;;) {
        v.clear();
        while (int(v.size()) < n + 1) {
          const cplx c = random_in_disk(rng, n + 1.0);
          v.push_back(c);
        }
        const double d = PseudopoleSet::min_separation(v);
        if (d < 0.5) continue;
        for (auto& c : v) c *= 2.0 / d;
        break;
      }
      const PseudopoleSet nodes(v);
      const double d_sharp = nodes.min_sep();
      const double delta = d_sharp / 8.0 * U(rng);
      std::vector<cplx> p = v;
      const std::size_t full = std::size_t(rng() % v.size());
      for (std::size_t j = 0; j < v.size(); ++j) p[j] += std::polar(j == full ? delta : delta * U(rng), 6.283185307 * U(rng));
      for (int m = 0; m <= n; ++m) {
        const auto g = lagrange_weight(nodes, m);
        for (int j = 0; j <= n; ++j) worst_id = std::max(worst_id, std::abs(g(v[std::size_t(j)]) - (j == m ? 1.0 : 0.0)));
        const auto r = interp_robustness(nodes, p, m);
        const double bound = lagrange_robustness_constant(n) * r.delta / r.d_sharp;
        double dev = r.dev_target;
        for (double d : r.dev_off) dev = std::max(dev, d);
        violations += !r.hypothesis_ok || dev > bound * (1 + kRel);
        if (bound > 0) worst_ratio = std::max(worst_ratio, dev / bound);
      }
      ++draws;
    }
  }
  const bool pass = worst_id <= 1e-12 && violations == 0;
  return {pass, fmt("draws=%d node_identity_worst=%.2e violations=%d worst_ratio=%.3f", draws, worst_id, violations,
                    worst_ratio)};
}

Verdict fd_window() {
  const PseudopoleSet nodes({cplx(1.0, -0.1), cplx(1.05, -0.3)});
  const auto g = modified_window(nodes, 1, 2);
  const std::vector<Mode> modes{mode({1.0, -0.1}), mode({1.05, -0.3}, 0.5)};
  const auto windowed = apply_window_modal(modes, g);
  std::string detail;
  bool pass = true;
  for (int p : {4, 8}) {
    std::vector<double> lx, ly;
    // steps stay above the rounding floor of the order-8 derivatives
    for (double dt : {0.4, 0.2, 0.1}) {
      const auto s = sample_grid(modes, {}, {}, 0.0, dt, std::size_t(std::lround(8.0 / dt)) + 1);
      const auto out = apply_window_fd(s, g, p);
      double err = 0.0;
      for (std::size_t k = 0; k < out.size(); ++k)
        err = std::max(err, std::abs(out.values[k] - eval_modes(windowed, out.time(k))));
      lx.push_back(std::log(dt));
      ly.push_back(std::log(err));
    }
    const double order = slope(lx, ly);
    pass = pass && std::abs(order - p) <= 0.5;
    detail += fmt("order%d=%.3f ", p, order);
  }
  return {pass, detail};
}

Verdict band_isolation() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  constexpr double nu1 = 0.6, nu2 = 2.0;
  auto rmat = [&](int d) {
    CMat m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = cplx(N(rng), N(rng));
    return m;
  };
  double worst = 0.0;
  int in_strip = 0;
  for (int model = 0; model < 50; ++model) {
    const int dim = 1 + int(rng() % 3);
    RationalResolvent R{dim, {}, {}};
    const int npoles = 1 + int(rng() % 5);
    for (int j = 0; j < npoles; ++j) {
      // keep poles at least 0.2 away from both integration lines
      double im;
      do im = -0.1 - 3.5 * U(rng);
      while (std::abs(im + nu1) < 0.2 || std::abs(im + nu2) < 0.2);
      const int order = 1 + int(rng() % 2);
      std::vector<CMat> laurent;
      for (int q = 0; q < order; ++q) laurent.push_back(rmat(dim));
      R.poles.push_back({cplx(6.0 * (U(rng) - 0.5), im), laurent});
    }
    CVec payload(dim);
    for (int i = 0; i < dim; ++i) payload(i) = cplx(N(rng), N(rng));
    const ForcingSpec f{4, 0.0, payload};
    for (double t : {1.0, 2.0, 5.0}) {
      const auto b = band_subtract(R, f, std::nullopt, nu1, nu2, t);
      worst = std::max(worst, b.mismatch);
      in_strip += b.poles_in_strip;
    }
  }
  return {worst < 1e-6, fmt("models=50 worst_mismatch=%.2e poles_in_strip_total=%d", worst, in_strip)};
}

Verdict rank_one_residue_check() {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> N(0.0, 1.0);
  auto rmat = [&](int d) {
    CMat m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = cplx(N(rng), N(rng));
    return m;
  };
  auto unitary = [&](int d) {
    Eigen::HouseholderQR<CMat> qr(rmat(d));
    return CMat(qr.householderQ() * CMat::Identity(d, d));
  };
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const CMat U = unitary(4), V = unitary(4);
    Eigen::Vector4cd s(1.0 + std::abs(N(rng)), 0.3 + std::abs(N(rng)), 0.1 + 0.5 * std::abs(N(rng)), 0.0);
    const MatrixPencil P{U * s.asDiagonal() * V.adjoint(), rmat(4), std::nullopt, {N(rng), -std::abs(N(rng))}};
    const auto r = rank_one_residue(P);
    double nearest = std::numeric_limits<double>::infinity();
    for (cplx z : pencil_other_roots(P)) nearest = std::min(nearest, std::abs(z - P.omega0));
    const CMat c = cauchy_residue(P, 0.5 * nearest, 256);
    worst = std::max(worst, (r.projector - c).norm() / std::max(1.0, c.norm()));
  }
  return {worst <= 1e-8, fmt("pencils=100 worst=%.2e", worst)};
}

Verdict pseudospectrum_inclusion() {
  const PseudospectrumModel m{{cplx(0.0, 0.0), cplx(1.0, 0.0)}, 4.0, 4.0, 1.0};
  const ScanGrid g{-0.5, 1.5, -1.0, 1.0, 400, 400};
  int excluded = 0, marked = 0;
  double ratio = 0.0;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto s = pseudospectrum_scan(m, g, eps);
    excluded += s.excluded;
    marked += s.marked;
    ratio = std::max(ratio, s.max_ratio);
  }
  return {excluded == 0 && marked > 0, fmt("C=%.1f marked=%d excluded=%d max_ratio=%.3f", m.inclusion_constant(), marked, excluded, ratio)};
}

ScenarioConfig scene(double T0, int ell, DataMode mode) {
  ScenarioConfig c;
  c.observation.t0 = T0;
  c.lattice.ell = ell;
  c.inversion.mode = mode;
  if (mode == DataMode::three_param) {
    c.lattice.lam_mode = LamMode::mass_only;
    c.inversion.grid_n = 7;
  }
  return c;
}

Verdict end_to_end_bias() {
  int rows = 0, violations = 0;
  double worst = 0.0;
  for (DataMode mode : {DataMode::two_param, DataMode::three_param}) {
    for (double T0 : {2.0, 4.0, 8.0}) {
      ScenarioConfig c = scene(T0, 100, mode);
      c.sweep = SweepConfig{SweepAxis::ell, {50.0, 100.0, 200.0}};
      for (const auto& r : sweep(c, 3).rows) {
        ++rows;
        const double bound = mode == DataMode::two_param ? r.bias.bound_2p : r.bias.bound_3p;
        const bool bad = r.violated() || !(r.bias.param_err <= bound * (1 + kRel));
        violations += bad;
        if (!bad) worst = std::max(worst, r.bias.param_err / bound);
      }
    }
  }
  // 1/ell trend: bias ratio from ell = 100 to 200
  struct Scene {
    double T0, M, a;
  };
  const Scene scenes[] = {{2, 1.0, 0.15},  {3, 1.0, 0.15},  {4, 1.0, 0.15},  {6, 1.0, 0.15},  {8, 1.0, 0.15},
                          {4, 0.95, 0.1},  {4, 1.05, 0.2},  {5, 0.92, 0.25}, {6, 1.08, 0.08}, {3, 0.98, 0.12}};
  std::vector<double> ratios;
  for (const auto& s : scenes) {
    ScenarioConfig c = scene(s.T0, 100, DataMode::two_param);
    c.p_true.M = s.M;
    c.p_true.a = s.a;
    c.sweep = SweepConfig{SweepAxis::ell, {100.0, 200.0}};
    const auto rep = sweep(c, 2);
    ratios.push_back(rep.rows[1].bias.param_err / rep.rows[0].bias.param_err);
  }
  const double med = median(ratios);
  const bool pass = violations == 0 && med <= 0.7;
  return {pass, fmt("rows=%d violations=%d worst_err/bound=%.3g median_ratio=%.3f max_ratio=%.3f", rows, violations,
                    worst, med, *std::max_element(ratios.begin(), ratios.end()))};
}

Verdict tail_start_time() {
  ScenarioConfig c;
  std::vector<double> T0s;
  for (double t = 2.0; t <= 12.0; t += 1.0) T0s.push_back(t);
  c.sweep = SweepConfig{SweepAxis::T0, T0s};
  const auto rep = sweep(c, 4);
  std::vector<double> ly;
  for (const auto& r : rep.rows)
    ly.push_back(std::log(r.plus.ext.eps) + c.tail.m * std::log(1.0 + r.cfg.observation.t0));
  const double fitted = slope(T0s, ly);
  const double expected = -(c.tail.nu + rep.rows[0].plus.omega_true.imag());
  const double rel = std::abs(fitted - expected) / std::abs(expected);
  return {rel <= 0.1, fmt("fitted=%.4f expected=%.4f rel_dev=%.3f", fitted, expected, rel)};
}

Verdict forcing_decay() {
  std::string detail;
  bool pass = true;
  for (int k : {2, 4}) {
    CVec payload(1);
    payload(0) = 1.0;
    const double order = forcing_decay_order(ForcingSpec{k, 0.0, payload}, 0.5);
    pass = pass && std::abs(order - k) <= 1.0;
    detail += fmt("k=%d order=%.4f ", k, order);
  }
  return {pass, detail};
}

Verdict confluent_fit_check() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int close = 0, better = 0;
  for (int i = 0; i < 500; ++i) {
    const cplx z = random_in_disk(rng, 1.0) * 0.8 + std::polar(0.2, 0.7 * i);
    const cplx b0 = random_in_disk(rng, 2.0) + 0.1, b1 = random_in_disk(rng, 2.0) + 0.1;
    const auto y = confluent_samples(b0, b1, z);
    const auto f = confluent_fit(y);
    worst = std::max({worst, std::abs(f.z - z), (std::abs(f.b0 - b0) + std::abs(f.b1 - b1)) / (1.0 + std::abs(b1 / z))});
    const auto two = prony4_two_node(y);
    if (std::abs(two.z1 - two.z2) < 1e-4) {
      ++close;
      better += f.residual < two.residual;
    }
  }
  return {worst <= 1e-8 && close > 0 && better == close,
          fmt("samples=500 worst_recovery=%.2e coalesced=%d confluent_better=%d", worst, close, better)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
    double budget_s;  // 0 = no time limit
  };
  const std::vector<Criterion> criteria{
      {"rayleigh_stability", rayleigh_stability, 30.0},
      {"frequency_extraction", frequency_extraction, 0.0},
      {"pure_mode_exactness", pure_mode_exactness, 0.0},
      {"hankel_identity", hankel_identity, 0.0},
      {"prony_conditioning", prony_conditioning, 60.0},
      {"window_identities", window_identities, 0.0},
      {"fd_window_order", fd_window, 0.0},
      {"band_isolation", band_isolation, 120.0},
      {"rank_one_residue", rank_one_residue_check, 0.0},
      {"pseudospectrum_inclusion", pseudospectrum_inclusion, 0.0},
      {"end_to_end_bias", end_to_end_bias, 0.0},
      {"tail_start_time", tail_start_time, 0.0},
      {"forcing_decay", forcing_decay, 0.0},
      {"confluent_fit", confluent_fit_check, 0.0},
  };
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      v.pass = false;
      v.detail += fmt(" over time budget %.0f s", c.budget_s);
    }
    passed += v.pass;
    std::printf("%s %2zu %-25s %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", i + 1, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%zu PASS\n", passed, criteria.size());
  return 0;
}
