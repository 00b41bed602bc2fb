#include "commands.hpp"

#include <ringlab/merotoy.hpp>

#include <algorithm>
#include <cmath>

namespace ringlab::cli {

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"extract",      "prony",    "band-isolate", "pseudospectrum",
                                              "window-check", "pipeline", "sweep"};
  return names;
}

bool is_subcommand(const std::string& name) {
  const auto& n = subcommands();
  return std::find(n.begin(), n.end(), name) != n.end();
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::configuration, where + ": " + what);
}

nlohmann::json base_metadata() {
  return {{"version", RINGLAB_VERSION},
          {"prony_C_hat", kPronyConditioningC},
          {"prony_c0", kPronySmallnessC0},
          {"check_abs_slack", kCheckAbsSlack},
          {"check_rel_slack", kCheckRelSlack}};
}

// ---- pipeline and sweep ----------------------------------------------------

void add_sector(Row& r, const std::string& tag, const SectorOutcome& s) {
  r.add("omega" + tag, s.omega_true);
  r.add("omega_prior" + tag, s.omega_prior);
  r.add("omega_hat" + tag, s.ext.omega_hat.value());
  r.add("z" + tag, s.ext.z_true);
  r.add("z_hat" + tag, s.ext.z_hat);
  r.add("amp_eff" + tag, s.amp_eff);
  r.add("eps0" + tag, s.ext.eps0);
  r.add("eps1" + tag, s.ext.eps1);
  r.add("eps" + tag, s.ext.eps);
  r.add("z_err" + tag, s.z_err);
  r.add("omega_err" + tag, s.omega_err);
  r.add("eps_small" + tag, s.ext.hypotheses_ok.eps_small);
  r.add("branch_hyp" + tag, s.ext.hypotheses_ok.branch_hyp);
  const double nan = std::nan("");
  r.add("eps_tail_bound" + tag, s.budget ? s.budget->eps_tail_bound : nan);
  r.add("eps_meas_bound" + tag, s.budget ? s.budget->eps_meas_bound : nan);
  r.add("eps_bound" + tag, s.budget ? s.budget->eps_bound : nan);
}

}  // namespace

Output pipeline_output(const RunReport& rep, const std::string& subcommand, const ScenarioConfig& cfg) {
  Output o;
  o.subcommand = subcommand;
  o.metadata = base_metadata();
  o.metadata["newton_tol"] = cfg.inversion.tol;
  o.metadata["jacobian_step"] = kJacobianStep;
  o.metadata["inverse_grid_n"] = cfg.inversion.grid_n;
  o.metadata["data_mode"] = cfg.inversion.mode == DataMode::two_param ? "2p" : "3p";
  if (cfg.sweep) {
    o.metadata["sweep_axis"] = to_string(cfg.sweep->axis);
    o.metadata["sweep_values"] = cfg.sweep->values;
  }
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& s = rep.rows[i];
    Row r;
    r.add("index", int(i));
    r.add("sweep_value", s.sweep_value);
    r.add("status", s.failed ? "failed" : "ok");
    r.add("error", s.error);
    if (!s.failed) {
      const auto& c = s.cfg;
      r.add("ell", c.lattice.ell);
      r.add("n", c.lattice.n);
      r.add("kappa", c.lattice.kappa);
      r.add("T0", c.observation.t0);
      r.add("T", c.observation.t_len);
      r.add("Delta", c.observation.delta);
      r.add("dt", c.observation.dt);
      r.add("M", c.p_true.M);
      r.add("a", c.p_true.a);
      r.add("Lambda", c.p_true.Lambda);
      add_sector(r, "_plus", s.plus);
      add_sector(r, "_minus", s.minus);
      r.add("U", s.G_true.U).add("V", s.G_true.V).add("W", s.G_true.W);
      r.add("U_hat", s.G_hat.U).add("V_hat", s.G_hat.V).add("W_hat", s.G_hat.W);
      r.add("data_err", s.bias.data_err);
      r.add("data_bound", s.data_bound);
      r.add("M_hat", s.p_hat.M).add("a_hat", s.p_hat.a).add("Lambda_hat", s.p_hat.Lambda);
      r.add("newton_iterations", s.newton_iterations);
      r.add("param_err", s.bias.param_err);
      r.add("bound_2p", s.bias.bound_2p);
      r.add("bound_3p", s.bias.bound_3p);
      r.add("bound_tail", s.bias.bound_tail);
      r.add("bound_meas", s.bias.bound_meas);
      r.add("eps_source", s.eps_source);
      r.add("C_star", s.inverse.C_star);
      r.add("c_star", s.inverse.c_star);
      for (const auto& ch : s.checks) o.check(int(i), r, ch);
    }
    o.table.rows.push_back(std::move(r));
  }
  o.exit_code = rep.exit_code();
  return o;
}

namespace {

Output run_pipeline_cmd(const json& j, bool is_sweep, int jobs) {
  Section root(j, "");
  auto cfg = parse_scenario(root);
  root.finish();
  if (is_sweep && !cfg.sweep) bad("sweep", "missing required section");
  if (!is_sweep && cfg.sweep) bad("sweep", "use the sweep subcommand for swept configs");
  if (!is_sweep) cfg.validate();
  const auto rep = is_sweep ? sweep(cfg, jobs) : run_pipeline(cfg);
  return pipeline_output(rep, is_sweep ? "sweep" : "pipeline", cfg);
}

// ---- extract ----------------------------------------------------------------

std::vector<Mode> parse_modes(Section& root) {
  const auto& arr = root.raw("modes");
  if (!arr.is_array() || arr.empty()) bad("modes", "expected a non-empty array");
  std::vector<Mode> modes;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section m(arr[i], "modes[" + std::to_string(i) + "]");
    Mode md;
    md.freq = ComplexFrequency::from(m.complex("omega"));
    md.amp = m.complex("amp", 1.0);
    md.poly_degree = m.integer("poly_degree", 0);
    if (md.poly_degree < 0) bad(m.path() + ".poly_degree", "must be >= 0");
    m.finish();
    modes.push_back(md);
  }
  return modes;
}

Output run_extract(const json& j) {
  Section root(j, "");
  const auto modes = parse_modes(root);
  const TailSpec tail = root.has("tail") ? parse_tail(root.sub("tail")) : TailSpec{};
  const NoiseSpec noise = root.has("noise") ? parse_noise(root.sub("noise")) : NoiseSpec{};
  ExtractionConfig ec;
  ec.setup = root.has("observation") ? parse_observation(root.sub("observation")) : ObservationSetup{};
  Section ex = root.sub("extract");
  const int ref = ex.integer("reference", 0);
  if (ref < 0 || ref >= int(modes.size())) bad("extract.reference", "mode index out of range");
  ec.prior = ComplexFrequency::from(ex.complex("prior", modes[std::size_t(ref)].freq.value()));
  if (ex.has("c_sep")) ec.c_sep = ex.num("c_sep");
  ex.finish();
  root.finish();

  const auto y = sample(modes, tail, noise, ec.setup);
  const Mode& m = modes[std::size_t(ref)];
  if (m.poly_degree != 0) bad("extract.reference", "reference mode must be a pure exponential");
  const auto res = extract(y, ec, std::vector<Mode>{m});

  Output o;
  o.subcommand = "extract";
  o.metadata = base_metadata();
  o.metadata["closed_form_path"] = y.exact_modes.has_value();
  Row r;
  r.add("omega", m.freq.value());
  r.add("omega_prior", ec.prior.value());
  r.add("omega_hat", res.omega_hat.value());
  r.add("z", res.z_true);
  r.add("z_hat", res.z_hat);
  r.add("eps0", res.eps0).add("eps1", res.eps1).add("eps", res.eps);
  r.add("bound_z", res.bound_z).add("bound_z_crude", res.bound_z_crude).add("bound_omega", res.bound_omega);
  r.add("eps_small", res.hypotheses_ok.eps_small).add("branch_hyp", res.hypotheses_ok.branch_hyp);
  const double z_err = std::abs(res.z_hat - res.z_true);
  const double w_err = std::abs(res.omega_hat.value() - m.freq.value());
  r.add("z_err", z_err).add("omega_err", w_err);
  const double delta = ec.setup.delta;
  o.check(0, r, make_check("z_stability", res.eps0 <= 0.25, z_err, res.eps0 <= 0.25 ? res.bound_z : 0.0));
  o.check(0, r, make_check("z_crude", res.eps <= 0.125, z_err, 3.0 * res.eps));
  o.check(0, r, make_check("omega", res.hypotheses_ok.eps_small && res.hypotheses_ok.branch_hyp, w_err,
                           omega_error_bound(res.eps, res.z_true, delta)));
  if (modes.size() == 1 && m.freq.im < 0.0 && ec.setup.t_len > 3.0 * delta) {
    const auto b = epsilon_budget(m.amp, m.freq, tail, noise_sup_bound(noise) * std::sqrt(ec.setup.t_len), ec.setup);
    r.add("eps_tail_bound", b.eps_tail_bound).add("eps_meas_bound", b.eps_meas_bound).add("eps_bound", b.eps_bound);
    o.check(0, r, make_check("eps_budget", true, res.eps, b.eps_bound));
  }
  if (ec.c_sep) {
    const auto d = disk_check(res.omega_hat, ec.prior, *ec.c_sep, res.eps, res.z_true, delta);
    r.add("disk_hyp", res.hypotheses_ok.disk_hyp);
    o.check(0, r, make_check("in_disk", res.hypotheses_ok.disk_hyp, std::abs(res.omega_hat.value() - ec.prior.value()),
                             0.5 * *ec.c_sep));
    r.add("in_disk", d.in_disk);
  }
  o.table.rows.push_back(std::move(r));
  o.exit_code = o.checks_exit_code();
  return o;
}

// ---- prony ------------------------------------------------------------------

Output run_prony(const json& j) {
  Section root(j, "");
  Section p = root.sub("prony");
  root.finish();
  PronySamples y{};
  std::optional<std::array<cplx, 4>> truth;  // a1, a2, z1, z2
  if (p.has("samples") == p.has("modes")) bad("prony", "give exactly one of samples or modes");
  if (p.has("samples")) {
    const auto v = p.complexes("samples");
    if (v.size() != 4) bad("prony.samples", "expected four samples");
    std::copy(v.begin(), v.end(), y.begin());
  } else {
    Section m = p.sub("modes");
    truth = std::array<cplx, 4>{m.complex("a1"), m.complex("a2"), m.complex("z1"), m.complex("z2")};
    m.finish();
    y = two_mode_samples((*truth)[0], (*truth)[1], (*truth)[2], (*truth)[3]);
  }
  std::optional<std::pair<cplx, cplx>> priors;
  if (p.has("priors")) {
    const auto v = p.complexes("priors");
    if (v.size() != 2) bad("prony.priors", "expected two priors");
    priors = {v[0], v[1]};
  }
  const double eta = p.num("eta", 0.0);
  const bool probe = p.flag("probe", false);
  p.finish();
  if (eta < 0.0) bad("prony.eta", "must be >= 0");
  if ((eta > 0.0 || probe) && !truth) bad("prony", "eta and probe need the modes form");

  const auto res = priors ? prony4(y, *priors) : prony4(y);
  Output o;
  o.subcommand = "prony";
  o.metadata = base_metadata();
  Row r;
  for (std::size_t k = 0; k < 4; ++k) r.add("y" + std::to_string(k), y[k]);
  r.add("s1", res.s1).add("s2", res.s2).add("delta0", res.delta0);
  r.add("confluent", res.confluent);
  r.add("z1", res.z1).add("z2", res.z2).add("a1", res.a1).add("a2", res.a2);
  r.add("b0", res.b0).add("b1", res.b1);
  r.add("residual", res.residual);
  if (res.labels) r.add("swapped", res.labels->swapped).add("ambiguous", res.labels->ambiguous);
  if (truth && eta > 0.0) {
    const auto& t = *truth;
    const auto rep = conditioning_report(t[0], t[1], t[2], t[3], eta, probe);
    const double worst = worst_root_error(t[0], t[1], t[2], t[3], eta);
    r.add("eta", eta).add("delta0_mag", rep.delta0_mag).add("smallness_ok", rep.smallness_ok);
    r.add("worst_root_error", worst).add("conditioning_bound", rep.bound);
    if (rep.scaling_exponent_probe) r.add("slope_probe", *rep.scaling_exponent_probe);
    o.check(0, r, make_check("prony_conditioning", rep.smallness_ok, worst, rep.bound));
  }
  o.table.rows.push_back(std::move(r));
  o.exit_code = o.checks_exit_code();
  return o;
}

// ---- band-isolate -------------------------------------------------------------

CMat parse_matrix(const json& v, int dim, const std::string& where) {
  CMat m(dim, dim);
  if (dim == 1 && (v.is_number() || (v.is_array() && v.size() == 2 && v[0].is_number()))) {
    m(0, 0) = to_complex(v, where);
    return m;
  }
  if (!v.is_array() || int(v.size()) != dim) bad(where, "expected a dim x dim matrix");
  for (int i = 0; i < dim; ++i) {
    if (!v[std::size_t(i)].is_array() || int(v[std::size_t(i)].size()) != dim) bad(where, "expected a dim x dim matrix");
    for (int k = 0; k < dim; ++k)
      m(i, k) = to_complex(v[std::size_t(i)][std::size_t(k)], where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  return m;
}

RationalResolvent parse_resolvent(Section s) {
  RationalResolvent R;
  R.dim = s.integer("dim", 1);
  if (R.dim < 1) bad(s.path() + ".dim", "must be >= 1");
  const auto& poles = s.raw("poles");
  if (!poles.is_array()) bad(s.path() + ".poles", "expected an array");
  for (std::size_t i = 0; i < poles.size(); ++i) {
    Section p(poles[i], s.path() + ".poles[" + std::to_string(i) + "]");
    ResolventPole rp;
    rp.omega = p.complex("omega");
    const auto& l = p.raw("laurent");
    if (!l.is_array() || l.empty()) bad(p.path() + ".laurent", "expected a non-empty array");
    for (std::size_t q = 0; q < l.size(); ++q)
      rp.laurent.push_back(parse_matrix(l[q], R.dim, p.path() + ".laurent[" + std::to_string(q) + "]"));
    p.finish();
    R.poles.push_back(rp);
  }
  if (s.has("hol")) {
    const auto& h = s.raw("hol");
    if (!h.is_array()) bad(s.path() + ".hol", "expected an array");
    for (std::size_t k = 0; k < h.size(); ++k)
      R.hol.push_back(parse_matrix(h[k], R.dim, s.path() + ".hol[" + std::to_string(k) + "]"));
  }
  s.finish();
  R.validate();
  return R;
}

ForcingSpec parse_forcing(Section s, int dim) {
  ForcingSpec f;
  f.k = s.integer("k", 2);
  f.beta = s.num("beta", 0.0);
  std::vector<cplx> pl = s.has("payload") ? s.complexes("payload") : std::vector<cplx>(std::size_t(dim), 1.0);
  s.finish();
  if (int(pl.size()) != dim) bad(s.path() + ".payload", "length must equal the resolvent dimension");
  f.payload = CVec(dim);
  for (int i = 0; i < dim; ++i) f.payload(i) = pl[std::size_t(i)];
  f.validate();
  return f;
}

std::optional<WindowPolynomial> parse_window_poly(Section s) {
  const auto nodes = s.complexes("nodes");
  const int target = s.integer("target", int(nodes.size()) - 1);
  const int m0 = s.integer("m0", 0);
  s.finish();
  return WindowPolynomial(PseudopoleSet(nodes), target, m0);
}

Output run_band(const json& j) {
  Section root(j, "");
  const auto R = parse_resolvent(root.sub("resolvent"));
  const auto f = parse_forcing(root.sub("forcing"), R.dim);
  std::optional<WindowPolynomial> g;
  if (root.has("window")) g = parse_window_poly(root.sub("window"));
  Section b = root.sub("band");
  const double nu1 = b.num("nu1"), nu2 = b.num("nu2");
  const auto times = b.nums("times");
  LineOptions opt;
  opt.tol = b.num("tol", opt.tol);
  const double plot_max = b.num("plot_sigma_max", 50.0);
  const int plot_n = b.integer("plot_samples", 201);
  b.finish();
  root.finish();
  if (times.empty()) bad("band.times", "expected at least one time");
  if (plot_n < 2 || !(plot_max > 0.0)) bad("band", "plot range must be positive with >= 2 samples");

  Output o;
  o.subcommand = "band-isolate";
  o.metadata = base_metadata();
  o.metadata["band_tolerance"] = kBandTolerance;
  o.metadata["line_tol"] = opt.tol;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto bs = band_subtract(R, f, g, nu1, nu2, times[i], opt);
    Row r;
    r.add("t", times[i]).add("nu1", nu1).add("nu2", nu2);
    r.add("poles_in_strip", bs.poles_in_strip);
    r.add("difference_norm", bs.difference.norm()).add("residue_sum_norm", bs.residue_sum.norm());
    r.add("difference_0", bs.difference(0)).add("residue_sum_0", bs.residue_sum(0));
    r.add("truncation_estimate", bs.truncation_estimate);
    o.check(int(i), r, make_check("band_identity", true, bs.mismatch, kBandTolerance, 0.0));
    o.table.rows.push_back(std::move(r));
  }
  Table plot;
  for (int k = 0; k < plot_n; ++k) {
    const double s = -plot_max + 2.0 * plot_max * k / (plot_n - 1);
    Row r;
    r.add("sigma", s);
    for (auto [name, nu] : {std::pair{"nu1", nu1}, std::pair{"nu2", nu2}}) {
      const cplx w{s, -nu};
      const double gv = g ? std::abs((*g)(w)) : 1.0;
      r.add(std::string("abs_gF_") + name, gv * forcing_transform_closed(f, w).norm());
    }
    plot.rows.push_back(std::move(r));
  }
  o.plotdata["sigma_grid"] = std::move(plot);
  o.exit_code = o.checks_exit_code();
  return o;
}

// ---- pseudospectrum -------------------------------------------------------------

Output run_pseudospectrum(const json& j) {
  Section root(j, "");
  Section p = root.sub("pseudospectrum");
  root.finish();
  PseudospectrumModel m;
  m.poles = p.complexes("poles");
  m.e_plus = p.num("e_plus", 1.0);
  m.e_minus = p.num("e_minus", 1.0);
  m.hol_bound = p.num("hol_bound", 0.0);
  ScanGrid g;
  {
    Section gs = p.sub("grid");
    const auto re = gs.nums("re"), im = gs.nums("im");
    if (re.size() != 2 || im.size() != 2) bad(gs.path(), "re and im must be [lo, hi]");
    g = {re[0], re[1], im[0], im[1], gs.integer("nx", 400), gs.integer("ny", 400)};
    gs.finish();
  }
  const auto eps = p.nums("eps");
  const bool plot = p.flag("plot", true);
  p.finish();
  if (eps.empty()) bad("pseudospectrum.eps", "expected at least one eps");

  Output o;
  o.subcommand = "pseudospectrum";
  o.metadata = base_metadata();
  o.metadata["C"] = m.inclusion_constant();
  o.metadata["c_q"] = m.c_q();
  bool all_included = true;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const auto s = pseudospectrum_scan(m, g, eps[i]);
    Row r;
    r.add("eps", eps[i]).add("C", s.C).add("radius", s.C * eps[i]);
    r.add("trivial", s.trivial).add("scanned", s.scanned).add("marked", s.marked).add("excluded", s.excluded);
    r.add("max_ratio", s.max_ratio);
    o.check(int(i), r, make_check("inclusion", !s.trivial, s.max_ratio, 1.0, 0.0));
    all_included = all_included && s.excluded == 0;
    o.table.rows.push_back(std::move(r));
  }
  o.metadata["inclusion_verdict"] = all_included ? "included" : "excluded points found";
  if (plot) {
    Table t;
    for (int jy = 0; jy < g.ny; ++jy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const cplx w = g.point(ix, jy);
        Row r;
        r.add("re", w.real()).add("im", w.imag()).add("model_norm", m.norm(w));
        t.rows.push_back(std::move(r));
      }
    o.plotdata["resolvent_norm"] = std::move(t);
  }
  o.exit_code = o.checks_exit_code();
  return o;
}

// ---- window-check -------------------------------------------------------------

Output run_window_check(const json& j) {
  Section root(j, "");
  Section w = root.sub("window_check");
  root.finish();
  const auto nodes = w.complexes("nodes");
  const PseudopoleSet set(nodes);
  const int target = w.integer("target", set.n());
  const int m0 = w.integer("m0", 0);
  std::optional<std::vector<cplx>> perturbed;
  if (w.has("perturbed")) perturbed = w.complexes("perturbed");
  const double nu = w.num("nu", 0.5);
  const int r_deriv = w.integer("derivative", 0);
  const double smax = w.num("plot_sigma_max", 10.0);
  const int count = w.integer("plot_samples", 201);
  w.finish();
  if (count < 2 || !(smax > 0.0) || r_deriv < 0) bad("window_check", "bad plot range or derivative order");
  const WindowPolynomial g(set, target, m0);

  Output o;
  o.subcommand = "window-check";
  o.metadata = base_metadata();
  o.metadata["node_tolerance"] = kNodeIdentityTolerance;
  o.metadata["d_sharp"] = set.min_sep();
  o.metadata["degree"] = g.degree();
  int row = 0;
  for (int k = 0; k <= set.n(); ++k) {
    const cplx v = g(set[std::size_t(k)]);
    const double expect = k == target ? 1.0 : 0.0;
    Row r;
    r.add("kind", "node").add("j", k).add("node", set[std::size_t(k)]).add("value", v).add("expected", expect);
    o.check(row, r, make_check("node_identity", true, std::abs(v - expect), kNodeIdentityTolerance, 0.0));
    o.table.rows.push_back(std::move(r));
    ++row;
  }
  if (perturbed) {
    const auto rep = interp_robustness(set, *perturbed, target);
    double dev = rep.dev_target;
    for (double d : rep.dev_off) dev = std::max(dev, d);
    Row r;
    r.add("kind", "robustness").add("delta", rep.delta).add("d_sharp", rep.d_sharp);
    r.add("dev_target", rep.dev_target).add("max_deviation", dev).add("robustness_bound", rep.bound);
    o.check(row, r, make_check("interp_robustness", rep.hypothesis_ok, dev, rep.bound));
    o.table.rows.push_back(std::move(r));
  }
  std::vector<double> sig;
  for (int k = 0; k < count; ++k) sig.push_back(-smax + 2.0 * smax * k / (count - 1));
  const auto prof = growth_profile(g, nu, sig, r_deriv);
  Table t;
  for (std::size_t k = 0; k < sig.size(); ++k) {
    Row r;
    r.add("sigma", sig[k]).add("abs_g_derivative", prof[k]);
    t.rows.push_back(std::move(r));
  }
  o.plotdata["growth_profile"] = std::move(t);
  o.exit_code = o.checks_exit_code();
  return o;
}

}  // namespace

Output run_subcommand(const std::string& name, const json& config, int jobs) {
  if (!is_subcommand(name)) fail(ErrorKind::configuration, "unknown subcommand '" + name + "'");
  try {
    if (name == "pipeline") return run_pipeline_cmd(config, false, jobs);
    if (name == "sweep") return run_pipeline_cmd(config, true, jobs);
    if (name == "extract") return run_extract(config);
    if (name == "prony") return run_prony(config);
    if (name == "band-isolate") return run_band(config);
    if (name == "pseudospectrum") return run_pseudospectrum(config);
    return run_window_check(config);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::configuration, std::string("config: ") + e.what());
  }
}

}  // namespace ringlab::cli
