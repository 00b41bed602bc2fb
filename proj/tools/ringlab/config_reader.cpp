#include "config_reader.hpp"

#include <fstream>
#include <sstream>

namespace ringlab::cli {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::configuration, where + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

}  // namespace

Section::Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) bad(path_.empty() ? "config" : path_, "expected an object");
}

bool Section::has(const std::string& key) const { return j_->contains(key); }

const json& Section::at(const std::string& key) {
  if (!j_->contains(key)) bad(join(path_, key), "missing required key");
  used_.insert(key);
  return (*j_)[key];
}

const json& Section::raw(const std::string& key) { return at(key); }

Section Section::sub(const std::string& key) { return Section(at(key), join(path_, key)); }

double Section::num(const std::string& key) {
  const auto& v = at(key);
  if (!v.is_number()) bad(join(path_, key), "expected a number");
  return v.get<double>();
}

double Section::num(const std::string& key, double def) { return has(key) ? num(key) : def; }

int Section::integer(const std::string& key) {
  const auto& v = at(key);
  if (!v.is_number_integer()) bad(join(path_, key), "expected an integer");
  return v.get<int>();
}

int Section::integer(const std::string& key, int def) { return has(key) ? integer(key) : def; }

bool Section::flag(const std::string& key, bool def) {
  if (!has(key)) return def;
  const auto& v = at(key);
  if (!v.is_boolean()) bad(join(path_, key), "expected true or false");
  return v.get<bool>();
}

std::string Section::str(const std::string& key) {
  const auto& v = at(key);
  if (!v.is_string()) bad(join(path_, key), "expected a string");
  return v.get<std::string>();
}

std::string Section::str(const std::string& key, const std::string& def) { return has(key) ? str(key) : def; }

cplx to_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  bad(where, "expected a number or [re, im]");
}

cplx Section::complex(const std::string& key) { return to_complex(at(key), join(path_, key)); }

cplx Section::complex(const std::string& key, cplx def) { return has(key) ? complex(key) : def; }

std::vector<double> Section::nums(const std::string& key) {
  const auto& v = at(key);
  if (!v.is_array()) bad(join(path_, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) bad(join(path_, key), "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<cplx> Section::complexes(const std::string& key) {
  const auto& v = at(key);
  if (!v.is_array()) bad(join(path_, key), "expected an array");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_complex(v[i], join(path_, key) + "[" + std::to_string(i) + "]"));
  return out;
}

void Section::finish() const {
  for (auto it = j_->begin(); it != j_->end(); ++it)
    if (!used_.count(it.key())) bad(join(path_, it.key()), "unknown key");
}

json load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorKind::configuration, "cannot open config file " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::configuration, std::string("config is not valid JSON: ") + e.what());
  }
}

TailSpec parse_tail(Section s) {
  TailSpec t;
  t.c_tail = s.num("c", 0.0);
  t.nu = s.num("nu", 1.0);
  t.m = s.integer("m", 0);
  t.leak = s.num("leak", 0.0);
  s.finish();
  t.validate();
  return t;
}

NoiseSpec parse_noise(Section s) {
  const std::string type = s.str("type", "none");
  NoiseSpec out;
  if (type == "none") {
    out = std::monostate{};
  } else if (type == "lcg") {
    LcgNoise g;
    const double seed = s.num("seed", 0.0);
    if (seed < 0 || seed != std::floor(seed) || seed > 9.007199254740992e15) bad(s.path() + ".seed", "expected a non-negative integer");
    g.seed = static_cast<std::uint64_t>(seed);
    g.amplitude = s.num("amplitude", 0.0);
    g.step = s.num("step", 0.0);
    g.origin = s.num("origin", 0.0);
    if (g.amplitude < 0.0 || g.step < 0.0) bad(s.path(), "amplitude and step must be >= 0");
    out = g;
  } else if (type == "harmonic") {
    HarmonicNoise h;
    const auto& terms = s.raw("terms");
    if (!terms.is_array()) bad(s.path() + ".terms", "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      Section t(terms[i], s.path() + ".terms[" + std::to_string(i) + "]");
      h.terms.push_back({t.num("c"), t.num("mu"), t.num("phi", 0.0)});
      t.finish();
    }
    out = h;
  } else {
    bad(s.path() + ".type", "expected none, lcg or harmonic");
  }
  s.finish();
  return out;
}

ObservationSetup parse_observation(Section s) {
  ObservationSetup o;
  o.t0 = s.num("T0", o.t0);
  o.t_len = s.num("T", o.t_len);
  o.delta = s.num("Delta", o.delta);
  o.dt = s.num("dt", o.dt);
  const std::string taper = s.str("taper", "raised_cosine");
  if (taper == "raised_cosine")
    o.taper = Taper::raised_cosine;
  else if (taper == "rectangular")
    o.taper = Taper::rectangular;
  else
    bad(s.path() + ".taper", "expected raised_cosine or rectangular");
  s.finish();
  o.validate();
  return o;
}

namespace {

LatticeModel parse_lattice(Section s) {
  LatticeModel m;
  m.ell = s.integer("ell", m.ell);
  m.n = s.integer("n", m.n);
  m.kappa = s.num("kappa", m.kappa);
  const std::string u = s.str("u_mode", "omega_ph");
  if (u == "omega_ph")
    m.u_mode = UMode::omega_ph;
  else if (u == "constant")
    m.u_mode = UMode::constant;
  else
    bad(s.path() + ".u_mode", "expected omega_ph or constant");
  m.u_const = s.num("u_const", m.u_const);
  const std::string lam = s.str("lam_mode", "omega_ph");
  if (lam == "omega_ph")
    m.lam_mode = LamMode::omega_ph;
  else if (lam == "constant")
    m.lam_mode = LamMode::constant;
  else if (lam == "mass_only")
    m.lam_mode = LamMode::mass_only;
  else
    bad(s.path() + ".lam_mode", "expected omega_ph, constant or mass_only");
  m.lam_const = s.num("lam_const", m.lam_const);
  if (s.has("offsets")) {
    const auto& arr = s.raw("offsets");
    if (!arr.is_array()) bad(s.path() + ".offsets", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section o(arr[i], s.path() + ".offsets[" + std::to_string(i) + "]");
      m.offsets[{o.integer("j"), o.integer("sign")}] = o.complex("value");
      o.finish();
    }
  }
  s.finish();
  m.validate();
  return m;
}

ParameterPoint parse_point(Section s, ParameterPoint p) {
  p.M = s.num("M", p.M);
  p.a = s.num("a", p.a);
  p.Lambda = s.num("Lambda", p.Lambda);
  s.finish();
  return p;
}

void parse_range(Section& s, const std::string& key, double& lo, double& hi) {
  if (!s.has(key)) return;
  const auto v = s.nums(key);
  if (v.size() != 2 || !(v[0] <= v[1])) bad(s.path() + "." + key, "expected [lo, hi] with lo <= hi");
  lo = v[0];
  hi = v[1];
}

WindowConfig parse_window(Section s) {
  WindowConfig w;
  w.enabled = s.flag("enabled", true);
  w.n = s.integer("n", w.n);
  w.m0 = s.integer("m0", w.m0);
  const std::string path = s.str("path", "modal");
  if (path == "modal")
    w.path = WindowPath::modal;
  else if (path == "fd")
    w.path = WindowPath::fd;
  else
    bad(s.path() + ".path", "expected modal or fd");
  w.stencil_order = s.integer("stencil_order", w.stencil_order);
  const std::string prior = s.str("prior", "exact");
  if (prior == "exact")
    w.prior = PriorSource::exact;
  else if (prior == "offset")
    w.prior = PriorSource::offset;
  else
    bad(s.path() + ".prior", "expected exact or offset");
  w.prior_offset = s.complex("prior_offset", 0.0);
  s.finish();
  return w;
}

InversionConfig parse_inversion(Section s) {
  InversionConfig c;
  const std::string mode = s.str("mode", "2p");
  if (mode == "2p")
    c.mode = DataMode::two_param;
  else if (mode == "3p")
    c.mode = DataMode::three_param;
  else
    bad(s.path() + ".mode", "expected 2p or 3p");
  if (s.has("box")) {
    Section b = s.sub("box");
    parse_range(b, "M", c.box.M_lo, c.box.M_hi);
    parse_range(b, "a", c.box.a_lo, c.box.a_hi);
    parse_range(b, "Lambda", c.box.L_lo, c.box.L_hi);
    b.finish();
  }
  if (s.has("guess")) c.guess = parse_point(s.sub("guess"), box_center(c.box));
  c.grid_n = s.integer("grid_n", c.grid_n);
  c.tol = s.num("tol", c.tol);
  s.finish();
  return c;
}

SweepAxis parse_axis(const std::string& a, const std::string& where) {
  for (auto ax : {SweepAxis::T0, SweepAxis::T, SweepAxis::Delta, SweepAxis::ell, SweepAxis::noise_amp,
                  SweepAxis::separation})
    if (to_string(ax) == a) return ax;
  bad(where, "expected one of T0, T, Delta, ell, noise_amp, separation");
}

}  // namespace

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::T0: return "T0";
    case SweepAxis::T: return "T";
    case SweepAxis::Delta: return "Delta";
    case SweepAxis::ell: return "ell";
    case SweepAxis::noise_amp: return "noise_amp";
    case SweepAxis::separation: return "separation";
  }
  return "?";
}

ScenarioConfig parse_scenario(Section& root) {
  ScenarioConfig c;
  if (root.has("lattice")) c.lattice = parse_lattice(root.sub("lattice"));
  if (root.has("parameters")) c.p_true = parse_point(root.sub("parameters"), c.p_true);
  if (root.has("amplitudes")) {
    Section a = root.sub("amplitudes");
    c.amp_plus = a.complex("plus", c.amp_plus);
    c.amp_minus = a.complex("minus", c.amp_minus);
    a.finish();
  }
  if (root.has("tail")) c.tail = parse_tail(root.sub("tail"));
  if (root.has("noise")) c.noise = parse_noise(root.sub("noise"));
  if (root.has("observation")) c.observation = parse_observation(root.sub("observation"));
  if (root.has("window")) c.window = parse_window(root.sub("window"));
  if (root.has("inversion")) c.inversion = parse_inversion(root.sub("inversion"));
  if (root.has("sweep")) {
    Section s = root.sub("sweep");
    SweepConfig sw;
    sw.axis = parse_axis(s.str("axis"), s.path() + ".axis");
    sw.values = s.nums("values");
    s.finish();
    c.sweep = sw;
  }
  return c;
}

}  // namespace ringlab::cli
