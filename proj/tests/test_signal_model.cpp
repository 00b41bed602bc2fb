#include <ringlab/signal_model.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ringlab;

namespace {

ObservationSetup setup_rect(double t0, double T, double delta, double dt) {
  ObservationSetup s{t0, T, delta, dt, Taper::rectangular};
  return s;
}

Mode mode(cplx w, cplx a = 1.0) { return Mode{ComplexFrequency::from(w), a, 0}; }

// Naive LCG stepping, independent of the jump-ahead in the library.
std::uint64_t lcg_naive(std::uint64_t x, int n) {
  for (int i = 0; i < n; ++i) x = 6364136223846793005ULL * x + 1442695040888963407ULL;
  return x;
}

}  // namespace

TEST(EvalScene, EmptySceneIsZero) { EXPECT_EQ(eval_scene({}, {}, {}, 5.0), cplx(0.0)); }

TEST(EvalScene, AmplitudeAtTimeZero) {
  EXPECT_NEAR(std::abs(eval_scene({mode({1.0, -0.1})}, {}, {}, 0.0) - 1.0), 0.0, 1e-15);
}

TEST(EvalScene, ModePlusTail) {
  TailSpec tail{0.05, 0.5, 0, 0.0};
  const cplx expected = std::exp(cplx(-0.2, -2.0)) + 0.05 * std::exp(-1.0);
  EXPECT_NEAR(std::abs(eval_scene({mode({1.0, -0.1})}, tail, {}, 2.0) - expected), 0.0, 1e-15);
}

TEST(EvalScene, PolynomialPrefactor) {
  Mode m{ComplexFrequency{0.0, 0.0}, 2.0, 2};
  EXPECT_NEAR(std::abs(m.eval(3.0) - 18.0), 0.0, 1e-14);
}

TEST(Sample, TooFewSamplesRejected) {
  ObservationSetup s{0.0, 4.0, 1.0, 4.0, Taper::raised_cosine};
  EXPECT_THROW(sample({mode(0.0)}, {}, {}, s), Error);
}

TEST(Sample, DeltaNotMultipleOfDtRejected) {
  ObservationSetup s{0.0, 10.0, 1.05, 0.1, Taper::raised_cosine};
  try {
    sample({mode(0.0)}, {}, {}, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::configuration);
  }
}

TEST(Sample, ConstantSignal) {
  ObservationSetup s{1.0, 10.0, 1.0, 0.25, Taper::raised_cosine};
  auto y = sample({mode(0.0)}, {}, {}, s);
  ASSERT_EQ(y.size(), 41u);
  for (auto v : y.values) EXPECT_EQ(v, cplx(1.0));
}

TEST(Sample, MatchesPointwiseEvaluation) {
  ObservationSetup s{0.0, 10.0, 1.0, 0.5, Taper::raised_cosine};
  TailSpec tail{0.05, 0.5, 0, 0.0};
  auto y = sample({mode({1.0, -0.1})}, tail, {}, s);
  ASSERT_EQ(y.size(), 21u);
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double t = 0.5 * double(k);
    const cplx ref = std::exp(cplx(-0.1 * t, -t)) + 0.05 * std::exp(-0.5 * t);
    EXPECT_NEAR(std::abs(y.values[k] - ref), 0.0, 1e-15);
  }
  EXPECT_FALSE(y.exact_modes.has_value());
}

TEST(Noise, LcgJumpAheadMatchesNaiveStepping) {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefcafebabeULL})
    for (int n : {0, 1, 2, 3, 17, 1000}) EXPECT_EQ(lcg::advance(seed, std::uint64_t(n)), lcg_naive(seed, n));
}

TEST(Noise, LcgSampleValueAndPiecewiseConstancy) {
  LcgNoise g{7, 0.5, 0.1, 2.0};
  const double u0 = double(lcg_naive(7, 1)) / 18446744073709551616.0;
  const double u3 = double(lcg_naive(7, 4)) / 18446744073709551616.0;
  EXPECT_DOUBLE_EQ(eval_noise(g, 2.0), 0.5 * (2 * u0 - 1));
  EXPECT_DOUBLE_EQ(eval_noise(g, 2.05), 0.5 * (2 * u0 - 1));
  EXPECT_DOUBLE_EQ(eval_noise(g, 2.3), 0.5 * (2 * u3 - 1));
}

TEST(Noise, DeterministicSamples) {
  ObservationSetup s{1.0, 10.0, 1.0, 0.01, Taper::raised_cosine};
  NoiseSpec n = LcgNoise{123456789, 0.01, 0.0, 0.0};
  auto a = sample({mode({1.0, -0.1})}, {}, n, s);
  auto b = sample({mode({1.0, -0.1})}, {}, n, s);
  ASSERT_EQ(a.values.size(), b.values.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.values[k], b.values[k]);
}

TEST(Noise, HarmonicSum) {
  NoiseSpec n = HarmonicNoise{{{0.1, 2.0, 0.5}, {0.2, 0.0, 0.0}}};
  EXPECT_NEAR(eval_noise(n, 1.5), 0.1 * std::cos(3.5) + 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(noise_sup_bound(n), 0.30000000000000004);
}

TEST(Weight, Examples) {
  ObservationSetup s{1.0, 10.0, 1.0, 0.01, Taper::raised_cosine};
  EXPECT_EQ(weight_eval(s, 11.0), 0.0);
  EXPECT_EQ(weight_eval(s, 1.0 + 1.0 + 3.5), 1.0);
  EXPECT_NEAR(weight_eval(s, 1.5), 0.5, 1e-15);
  EXPECT_NEAR(weight_eval(s, 9.5), 0.5, 1e-15);
  s.taper = Taper::rectangular;
  EXPECT_EQ(weight_eval(s, 1.5), 0.0);
  EXPECT_EQ(weight_eval(s, 2.0), 1.0);
  EXPECT_EQ(weight_eval(s, 9.0), 1.0);
}

TEST(Weight, SandwichProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ObservationSetup s{4 * U(rng), 6 + 6 * U(rng), 0.5 + U(rng), 0.01,
                       trial % 2 ? Taper::rectangular : Taper::raised_cosine};
    for (int k = 0; k < 200; ++k) {
      const double t = s.t0 - 1 + (s.t_len + 2) * U(rng);
      const double w = weight_eval(s, t);
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
      if (t >= s.plateau_begin() && t <= s.plateau_end()) EXPECT_EQ(w, 1.0);
      if (t < s.t0 || t > s.support_end()) EXPECT_EQ(w, 0.0);
    }
  }
}

TEST(WeightedInner, ZeroSignals) {
  auto s = setup_rect(1.0, 10.0, 1.0, 0.1);
  auto z = sample({}, {}, {}, s);
  EXPECT_EQ(weighted_inner(z, z, s), cplx(0.0));
}

TEST(WeightedInner, DecayingExponentialClosedForm) {
  auto s = setup_rect(1.0, 10.0, 1.0, 0.01);
  // f(t) = e^{-0.1 t} is the mode with omega = -0.1i.
  auto f = sample({mode({0.0, -0.1})}, {}, {}, s);
  ASSERT_TRUE(f.exact_modes.has_value());
  const double expected = (std::exp(-0.4) - std::exp(-1.8)) / 0.2;
  EXPECT_NEAR(expected, 2.5251058, 1e-7);
  EXPECT_NEAR(weighted_inner(f, f, s).real(), expected, 1e-13);
  f.exact_modes.reset();
  EXPECT_NEAR(weighted_inner(f, f, s).real(), expected, 1e-4);
}

TEST(WeightedInner, OscillatoryTrapezoidSecondOrder) {
  const cplx exact = kI * (std::exp(cplx(0, -9.0)) - std::exp(cplx(0, -2.0)));
  double prev = 0.0;
  for (double dt : {0.1, 0.05, 0.025}) {
    auto s = setup_rect(1.0, 10.0, 1.0, dt);
    auto f = sample({mode(-1.0)}, {}, {}, s);
    auto g = sample({mode(-2.0)}, {}, {}, s);
    EXPECT_NEAR(std::abs(weighted_inner(f, g, s) - exact), 0.0, 1e-13);
    f.exact_modes.reset();
    const double err = std::abs(weighted_inner(f, g, s) - exact);
    EXPECT_LT(err, dt * dt);
    if (prev > 0) EXPECT_NEAR(std::log2(prev / err), 2.0, 0.1);
    prev = err;
  }
}

TEST(WeightedInner, RaisedCosineClosedFormMatchesQuadrature) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ObservationSetup s{2 + 2 * U(rng), 10.0, 1.0, 0.01, Taper::raised_cosine};
    std::vector<Mode> f{mode({3 * U(rng), -0.3 * std::abs(U(rng))}, {U(rng), U(rng)}),
                        mode({3 * U(rng), -0.3 * std::abs(U(rng))}, {U(rng), U(rng)})};
    std::vector<Mode> g{mode({3 * U(rng), -0.3 * std::abs(U(rng))}, {U(rng), U(rng)})};
    const cplx closed = weighted_inner_modes(f, g, s);
    const cplx quad = weighted_inner_quad([&](double t) { return eval_modes(f, t); },
                                          [&](double t) { return eval_modes(g, t); }, s, {1e-12, 40});
    EXPECT_NEAR(std::abs(closed - quad), 0.0, 1e-10 * std::max(1.0, std::abs(quad)));
  }
}

TEST(WeightedInner, GridMismatchRejected) {
  auto s = setup_rect(1.0, 10.0, 1.0, 0.1);
  auto f = sample({mode(1.0)}, {}, {}, s);
  f.exact_modes.reset();
  auto g = f;
  g.dt = 0.05;
  EXPECT_THROW(weighted_inner(f, g, s), Error);
  auto h = f;
  h.t_start += 0.03;
  EXPECT_THROW(weighted_inner(f, h, s), Error);
}

TEST(Shift, ConstantSignal) {
  auto s = setup_rect(0.0, 10.0, 1.0, 0.5);
  auto y = sample({mode(0.0, 3.0)}, {}, {}, s);
  auto sy = shift(y, 1.0);
  for (auto v : sy.values) EXPECT_EQ(v, cplx(3.0));
}

TEST(Shift, ExponentialEigenrelation) {
  auto s = setup_rect(0.0, 10.0, 1.0, 0.01);
  const cplx w{1.3, -0.2};
  auto y = sample({mode(w)}, {}, {}, s);
  auto sy = shift(y, 1.0);
  const cplx z = std::exp(-kI * w * 1.0);
  for (std::size_t k = 0; k < sy.size(); ++k) EXPECT_NEAR(std::abs(sy.values[k] - z * y.values[k]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(sy.exact_modes->front().amp - z), 0.0, 1e-15);
}

TEST(Shift, LengthShrinks) {
  auto s = setup_rect(0.0, 10.0, 0.3, 0.1);
  auto y = sample({mode(0.0)}, {}, {}, s);
  EXPECT_EQ(shift(y, 0.3).size(), y.size() - 3);
  EXPECT_THROW(shift(y, 0.25), Error);
}

TEST(ModeEnergy, Examples) {
  auto s = setup_rect(1.0, 10.0, 1.0, 0.01);
  EXPECT_NEAR(mode_energy_lower_bound(1.0, {0.0, -0.1}, s), 2.5251058, 1e-7);
  EXPECT_EQ(mode_energy_lower_bound(0.0, {0.0, -0.1}, s), 0.0);
  EXPECT_NEAR(mode_energy_crude_bound(1.0, {0.0, -0.1}, s), std::exp(-0.9) * std::sqrt(7.0), 1e-14);
  EXPECT_NEAR(mode_energy_crude_bound(1.0, {0.0, -0.1}, s), 1.075682, 1e-6);
  auto tight = setup_rect(0.0, 3.0, 1.0, 0.5);
  EXPECT_THROW(mode_energy_crude_bound(1.0, {0.0, -0.1}, tight), Error);
}

TEST(ModeEnergy, LowerBoundsClosedFormEnergy) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    ObservationSetup s{5 * U(rng), 5 + 10 * U(rng), 0.2 + U(rng), 0.01,
                       trial % 2 ? Taper::rectangular : Taper::raised_cosine};
    s.t_len = std::max(s.t_len, 3.5 * s.delta);
    const cplx a{U(rng) - 0.5, U(rng) - 0.5};
    const ComplexFrequency w{10 * (U(rng) - 0.5), -U(rng)};
    const double energy = std::pow(weighted_norm_modes({Mode{w, a, 0}}, s), 2);
    const double lb = mode_energy_lower_bound(a, w, s);
    EXPECT_GE(energy, lb * (1 - 1e-12));
    EXPECT_GE(std::sqrt(lb), mode_energy_crude_bound(a, w, s) * (1 - 1e-12));
  }
}

TEST(ResidualL2, Examples) {
  auto s = setup_rect(1.0, 10.0, 1.0, 0.1);
  EXPECT_EQ(residual_l2(sample({}, {}, {}, s), s), 0.0);
  auto s4 = setup_rect(0.0, 4.0, 1.0, 0.1);
  auto one = sample({mode(0.0)}, {}, {}, s4);
  EXPECT_NEAR(residual_l2(one, s4), 2.0, 1e-14);
  one.exact_modes.reset();
  EXPECT_NEAR(residual_l2(one, s4), 2.0, 1e-14);
}

TEST(ResidualL2, DominatesWeightedNorms) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double dt = 0.02;
    ObservationSetup s{double(int(40 * U(rng))) * 0.1, 6.0 + double(int(40 * U(rng))) * 0.1, 0.2 + 0.02 * int(40 * U(rng)),
                       dt, trial % 3 ? Taper::raised_cosine : Taper::rectangular};
    s.t_len = std::max(s.t_len, 3.0 * s.delta + 1.0);
    s.t_len = std::round(s.t_len / dt) * dt;
    std::vector<Mode> modes{mode({4 * U(rng) - 2, -0.5 * U(rng)}, {U(rng), U(rng)})};
    TailSpec tail{U(rng), 0.1 + U(rng), int(3 * U(rng)), 0.01 * U(rng)};
    NoiseSpec noise = LcgNoise{std::uint64_t(trial) * 7919ULL, 0.1 * U(rng), 0.0, 0.0};
    auto r = sample(modes, tail, noise, s);
    const double full = residual_l2(r, s);
    EXPECT_LE(weighted_norm(r, s), full * (1 + 1e-12));
    EXPECT_LE(weighted_norm(shift(r, s.delta), s), full * (1 + 1e-12));
  }
}

TEST(Tail, EnvelopeNonincreasing) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    TailSpec tail{5 * U(rng), 0.01 + 2 * U(rng), int(6 * U(rng)), 0.0};
    double prev = tail.envelope(0.0);
    for (double t = 0.05; t < 50.0; t += 0.05) {
      const double v = tail.envelope(t);
      EXPECT_LE(v, prev);
      prev = v;
    }
  }
}
