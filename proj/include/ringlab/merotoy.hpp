#pragma once

#include <ringlab/analytic_window.hpp>
#include <ringlab/error.hpp>
#include <ringlab/quadrature.hpp>
#include <ringlab/signal_model.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace ringlab {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Operator 2-norm (largest singular value).
inline double op_norm(const CMat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

struct ResolventPole {
  cplx omega;
  std::vector<CMat> laurent;  ///< laurent[q-1] multiplies (w - omega)^-q
  int order() const { return static_cast<int>(laurent.size()); }
};

/// R(w) = sum_poles sum_q Pi^[q] (w - w_j)^-q + sum_k hol[k] w^k
struct RationalResolvent {
  int dim = 1;
  std::vector<ResolventPole> poles;
  std::vector<CMat> hol;

  void validate() const {
    require(dim >= 1, ErrorKind::configuration, "resolvent dimension must be >= 1");
    for (std::size_t i = 0; i < poles.size(); ++i) {
      const auto& p = poles[i];
      require(p.order() >= 1, ErrorKind::configuration, "pole order must be >= 1");
      require(std::isfinite(p.omega.real()) && std::isfinite(p.omega.imag()), ErrorKind::configuration,
              "pole not finite");
      for (const auto& m : p.laurent)
        require(m.rows() == dim && m.cols() == dim && m.allFinite(), ErrorKind::configuration,
                "Laurent coefficient must be a finite dim x dim matrix");
      for (std::size_t j = 0; j < i; ++j)
        require(poles[j].omega != p.omega, ErrorKind::configuration, "poles must be pairwise distinct");
    }
    for (const auto& m : hol)
      require(m.rows() == dim && m.cols() == dim && m.allFinite(), ErrorKind::configuration,
              "holomorphic coefficient must be a finite dim x dim matrix");
  }

  int hol_degree() const { return hol.empty() ? -1 : static_cast<int>(hol.size()) - 1; }

  CMat operator()(cplx w) const {
    CMat r = CMat::Zero(dim, dim);
    for (const auto& p : poles) {
      const cplx d = w - p.omega;
      if (d == cplx(0.0)) fail(ErrorKind::contour, "resolvent evaluated at a pole");
      cplx inv = 1.0 / d, pw = inv;
      for (const auto& m : p.laurent) {
        r += pw * m;
        pw *= inv;
      }
    }
    cplx pw = 1.0;
    for (const auto& m : hol) {
      r += pw * m;
      pw *= w;
    }
    return r;
  }
};

/// f(t) = (t(1-t))^k e^{beta t} payload on (0,1), zero elsewhere. The
/// extension by zero has k bounded weak derivatives; |Fhat| decays like |w|^-(k+1).
struct ForcingSpec {
  int k = 2;
  double beta = 0.0;
  CVec payload;

  void validate() const {
    require(k >= 1, ErrorKind::configuration, "bump order k must be >= 1");
    require(std::isfinite(beta), ErrorKind::configuration, "beta not finite");
    require(payload.size() >= 1 && payload.allFinite(), ErrorKind::configuration, "payload must be a finite vector");
  }

  /// Ascending coefficients of (t - t^2)^k.
  std::vector<double> bump_coefficients() const {
    std::vector<double> c(std::size_t(2 * k + 1), 0.0);
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      c[std::size_t(k + j)] = (j % 2 ? -binom : binom);
      binom = binom * (k - j) / (j + 1);
    }
    return c;
  }

  double shape(double t) const {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::pow(t * (1.0 - t), k) * std::exp(beta * t);
  }
};

namespace detail {

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * double(i));
  return d;
}

inline double poly_value(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
  return v;
}

/// int_0^1 P(t) e^{s t} dt for a real polynomial P.
inline cplx poly_exp_integral(const std::vector<double>& p, cplx s) {
  const double deg = double(p.size());
  if (std::abs(s) > std::max(8.0, 4.0 * deg)) {
    // repeated integration by parts terminates for polynomials
    const cplx es = std::exp(s);
    cplx sum = 0.0, inv = 1.0 / s, pw = inv;
    std::vector<double> d = p;
    double sign = 1.0;
    while (!d.empty()) {
      sum += sign * pw * (es * poly_value(d, 1.0) - poly_value(d, 0.0));
      d = poly_derivative(d);
      pw *= inv;
      sign = -sign;
    }
    return sum;
  }
  // composite 30-point Gauss-Legendre, exact to rounding for |s| <= 4 deg
  const int panels = std::max(1, int(std::ceil(std::abs(s) / 8.0)));
  cplx total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = double(i) / panels, b = double(i + 1) / panels;
    total += boost::math::quadrature::gauss<double, 30>::integrate(
        [&](double t) { return poly_value(p, t) * std::exp(s * t); }, a, b);
  }
  return total;
}

/// Coefficients of t^r (t - t^2)^k.
inline std::vector<double> shifted_bump(const ForcingSpec& f, int r) {
  auto c = f.bump_coefficients();
  c.insert(c.begin(), std::size_t(r), 0.0);
  return c;
}

}  // namespace detail

/// d^r/dw^r of Fhat(w) = int_0^1 e^{i w t} f(t) dt, closed form.
inline CVec forcing_transform_derivative(const ForcingSpec& f, cplx w, int r) {
  require(r >= 0, ErrorKind::configuration, "derivative order must be >= 0");
  const cplx s = kI * w + f.beta;
  const cplx ir = std::pow(kI, r);
  return ir * detail::poly_exp_integral(detail::shifted_bump(f, r), s) * f.payload;
}

inline CVec forcing_transform_closed(const ForcingSpec& f, cplx w) { return forcing_transform_derivative(f, w, 0); }

/// Fhat(w) by adaptive quadrature.
inline CVec forcing_transform(const ForcingSpec& f, cplx w, const QuadOptions& opt = {}) {
  f.validate();
  if (f.payload.isZero(0.0)) return CVec::Zero(f.payload.size());
  const int panels = std::max(1, int(std::ceil(std::abs(w) / 8.0)));
  std::vector<double> br;
  for (int i = 0; i <= panels; ++i) br.push_back(double(i) / panels);
  const cplx scalar = integrate_piecewise([&](double t) { return std::exp(kI * w * t) * f.shape(t); }, br, opt);
  return scalar * f.payload;
}

/// Fitted decay order of |Fhat(sigma - i nu)| on [s_lo, s_hi]: least-squares
/// slope of log of the upper envelope sup_{s' >= s} |Fhat| against log s, negated.
inline double forcing_decay_order(const ForcingSpec& f, double nu, double s_lo = 10.0, double s_hi = 100.0,
                                  int samples = 4000) {
  require(0.0 < s_lo && s_lo < s_hi && samples >= 10, ErrorKind::configuration, "bad decay-fit range");
  const auto n = static_cast<std::size_t>(samples);
  std::vector<double> ls(n), lv(n);
  const double r = std::log(s_hi / s_lo) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double s = s_lo * std::exp(r * i);
    ls[std::size_t(i)] = std::log(s);
    lv[std::size_t(i)] = forcing_transform_closed(f, {s, -nu}).norm();
  }
  for (int i = samples - 2; i >= 0; --i) lv[std::size_t(i)] = std::max(lv[std::size_t(i)], lv[std::size_t(i + 1)]);
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < samples; ++i) {
    lv[std::size_t(i)] = std::log(lv[std::size_t(i)]);
    mx += ls[std::size_t(i)] / samples;
    my += lv[std::size_t(i)] / samples;
  }
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < samples; ++i) {
    sxy += (ls[std::size_t(i)] - mx) * (lv[std::size_t(i)] - my);
    sxx += (ls[std::size_t(i)] - mx) * (ls[std::size_t(i)] - mx);
  }
  return -sxy / sxx;
}

/// Holomorphic vector function together with its derivatives: returns
/// [F(w), F'(w), ..., F^(r)(w)].
using HolomorphicJet = std::function<std::vector<CVec>(cplx, int)>;

/// Derivatives of a holomorphic callable from Cauchy integrals on a circle
/// of radius `radius` with `n` trapezoid nodes.
inline HolomorphicJet cauchy_jet(std::function<CVec(cplx)> f, double radius = 0.25, int n = 32) {
  return [f = std::move(f), radius, n](cplx w0, int r) {
    std::vector<CVec> out;
    std::vector<CVec> vals;
    std::vector<cplx> pts;
    for (int j = 0; j < n; ++j) {
      const cplx e = std::polar(1.0, 2.0 * std::numbers::pi * j / n);
      pts.push_back(e);
      vals.push_back(f(w0 + radius * e));
    }
    double fact = 1.0;
    for (int q = 0; q <= r; ++q) {
      if (q > 0) fact *= q;
      CVec acc = CVec::Zero(vals[0].size());
      for (int j = 0; j < n; ++j) acc += vals[std::size_t(j)] * std::pow(pts[std::size_t(j)], -q);
      out.push_back(acc * (fact / (n * std::pow(radius, q))));
    }
    return out;
  };
}

/// Exact jet of w -> g(w) Fhat(w) via the Leibniz rule.
inline HolomorphicJet forcing_jet(const ForcingSpec& f, std::optional<WindowPolynomial> g = std::nullopt) {
  return [f, g](cplx w, int r) {
    std::vector<CVec> fh;
    for (int q = 0; q <= r; ++q) fh.push_back(forcing_transform_derivative(f, w, q));
    if (!g) return fh;
    std::vector<cplx> gt = g->taylor(w, r);  // g^(j)/j!
    std::vector<CVec> out;
    for (int q = 0; q <= r; ++q) {
      CVec acc = CVec::Zero(f.payload.size());
      double qf = 1.0;
      for (int i = 2; i <= q; ++i) qf *= i;
      double jf = 1.0;  // j!
      for (int j = 0; j <= q; ++j) {
        if (j > 0) jf *= j;
        double mf = 1.0;
        for (int i = 2; i <= q - j; ++i) mf *= i;
        // binom(q,j) g^(j) = q!/(j!(q-j)!) * j! * taylor_j
        acc += (qf / mf) * gt[std::size_t(j)] * fh[std::size_t(q - j)];
      }
      out.push_back(acc);
    }
    return out;
  };
}

/// i e^{-i w0 t} sum_q sum_r (-it)^{q-1-r}/((q-1-r)! r!) Pi^[q] F^(r)(w0), i.e.
/// (1/2pi) times the positively oriented circle integral of e^{-iwt} R(w) F(w).
inline CVec residue_time_term(const ResolventPole& pole, const HolomorphicJet& F, double t) {
  require(t > 0.0, ErrorKind::configuration, "t must be > 0");
  const int m = pole.order();
  const auto jet = F(pole.omega, m - 1);
  CVec acc = CVec::Zero(jet[0].size());
  auto fact = [](int n) {
    double v = 1.0;
    for (int i = 2; i <= n; ++i) v *= i;
    return v;
  };
  for (int q = 1; q <= m; ++q)
    for (int r = 0; r <= q - 1; ++r) {
      const int p = q - 1 - r;
      const cplx c = std::pow(-kI * t, p) / (fact(p) * fact(r));
      acc += c * (pole.laurent[std::size_t(q - 1)] * jet[std::size_t(r)]);
    }
  return kI * std::exp(-kI * pole.omega * t) * acc;
}

struct LineIntegral {
  CVec value;
  double sigma_max = 0.0;
  double truncation_estimate = 0.0;  ///< envelope tail beyond +-sigma_max
  double quadrature_error = 0.0;
};

struct LineOptions {
  double tol = 1e-8;
  std::optional<double> sigma_max;  ///< fixed truncation; chosen from the envelope when empty
  QuadOptions quad{1e-10, 30};
};

namespace detail {

/// sup-based constant B with |Fhat(sigma - i nu)| <= B |payload| / |w|^(k+1).
inline double forcing_decay_constant(const ForcingSpec& f, double nu) {
  // f = P(t) e^{beta t}; after k+1 integrations by parts only f^(k) at the
  // endpoints and the integral of f^(k+1) remain.
  std::vector<double> p = f.bump_coefficients();
  auto diff = [&](const std::vector<double>& c) {
    // (c e^{beta t})' = (c' + beta c) e^{beta t}
    std::vector<double> d = poly_derivative(c);
    d.resize(c.size(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) d[i] += f.beta * c[i];
    return d;
  };
  for (int i = 0; i < f.k; ++i) p = diff(p);
  const double fk0 = std::abs(poly_value(p, 0.0));
  const double fk1 = std::abs(poly_value(p, 1.0)) * std::exp(f.beta + nu);
  const auto p1 = diff(p);
  double sup = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double t = i / 400.0;
    sup = std::max(sup, std::abs(poly_value(p1, t)) * std::exp((f.beta + nu) * t));
  }
  return fk0 + fk1 + 1.05 * sup;
}

}  // namespace detail

/// Power-law envelope of |e^{-iwt} g(w) R(w) Fhat(w)| on Im w = -nu for
/// |sigma| beyond every pole; used to place the truncation.
struct LineEnvelope {
  double decay_power = 0.0;  ///< integrand ~ |sigma|^-decay_power
  std::function<double(double)> bound;
};

inline LineEnvelope line_envelope(const RationalResolvent& R, const ForcingSpec& f,
                                  const std::optional<WindowPolynomial>& g, double nu, double t) {
  const double B = detail::forcing_decay_constant(f, nu) * f.payload.norm();
  double reach = 0.0;
  for (const auto& p : R.poles) reach = std::max(reach, std::abs(p.omega));
  std::vector<double> gc;
  if (g)
    for (auto c : g->coefficients()) gc.push_back(std::abs(c));
  else
    gc = {1.0};
  std::vector<std::vector<double>> pn;
  for (const auto& p : R.poles) {
    std::vector<double> v;
    for (const auto& m : p.laurent) v.push_back(op_norm(m));
    pn.push_back(v);
  }
  std::vector<double> hn;
  for (const auto& m : R.hol) hn.push_back(op_norm(m));
  const int gdeg = static_cast<int>(gc.size()) - 1;
  const int hdeg = std::max(0, R.hol_degree());
  LineEnvelope e;
  e.decay_power = double(f.k + 1 - gdeg - hdeg);
  e.bound = [=](double sigma) {
    const double a = std::hypot(sigma, nu);
    double gv = 0.0, pw = 1.0;
    for (double c : gc) {
      gv += c * pw;
      pw *= a;
    }
    double rn = 0.0;
    const double dist = std::max(a - reach, 1e-300);
    for (std::size_t i = 0; i < pn.size(); ++i) {
      double q = 1.0 / dist;
      for (double c : pn[i]) {
        rn += c * q;
        q /= dist;
      }
    }
    pw = 1.0;
    for (double c : hn) {
      rn += c * pw;
      pw *= a;
    }
    return std::exp(-nu * t) * gv * rn * B / std::pow(a, f.k + 1) / (2.0 * std::numbers::pi);
  };
  return e;
}

/// (1/2pi) int_{Im w = -nu, |sigma| <= sigma_max} e^{-iwt} g(w) R(w) Fhat(w) dw
inline LineIntegral line_integral(const RationalResolvent& R, const ForcingSpec& f,
                                  const std::optional<WindowPolynomial>& g, double nu, double t,
                                  const LineOptions& opt = {}) {
  R.validate();
  f.validate();
  require(t > 0.0, ErrorKind::configuration, "t must be > 0");
  require(f.payload.size() == R.dim, ErrorKind::configuration, "payload dimension mismatch");
  double reach = 0.0;
  for (const auto& p : R.poles) {
    if (std::abs(p.omega.imag() + nu) <= 1e-12 * (1.0 + std::abs(p.omega)))
      fail(ErrorKind::contour, "pole on the integration line");
    reach = std::max(reach, std::abs(p.omega));
  }
  const auto env = line_envelope(R, f, g, nu, t);
  if (!opt.sigma_max && !(env.decay_power > 1.0))
    fail(ErrorKind::configuration, "integrand does not decay fast enough on the line; raise the bump order k");

  auto tail = [&](double s) {
    // 2 * int_s^inf C sigma^-p = 2 s env(s) / (p - 1) for a pure power law
    return env.decay_power > 1.0 ? 2.0 * s * env.bound(s) / (env.decay_power - 1.0)
                                 : std::numeric_limits<double>::infinity();
  };
  LineIntegral out;
  if (opt.sigma_max) {
    out.sigma_max = *opt.sigma_max;
  } else {
    double s = 2.0 * reach + 10.0;
    while (tail(s) >= opt.tol / 10.0 && s < 1e7) s *= 1.5;
    require(tail(s) < opt.tol / 10.0, ErrorKind::configuration, "truncation estimate did not reach tolerance");
    out.sigma_max = s;
  }
  out.truncation_estimate = tail(out.sigma_max);

  std::vector<double> br;
  const double width = std::min(4.0, 4.0 * 2.0 * std::numbers::pi / t);
  const int panels = std::max(2, int(std::ceil(2.0 * out.sigma_max / width)));
  for (int i = 0; i <= panels; ++i) br.push_back(-out.sigma_max + 2.0 * out.sigma_max * i / panels);
  for (const auto& p : R.poles)
    if (std::abs(p.omega.real()) < out.sigma_max) br.push_back(p.omega.real());
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());

  auto integrand = [&](double sigma) -> CVec {
    const cplx w(sigma, -nu);
    cplx gv = g ? (*g)(w) : cplx(1.0);
    return (std::exp(-kI * w * t) * gv / (2.0 * std::numbers::pi)) * (R(w) * forcing_transform_closed(f, w));
  };
  out.value = CVec::Zero(R.dim);
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    for (Eigen::Index c = 0; c < R.dim; ++c) {
      double e = 0.0;
      out.value(c) += integrate([&](double s) { return cplx(integrand(s)(c)); }, br[i], br[i + 1], opt.quad, &e);
      err += e;
    }
  }
  out.quadrature_error = err;
  return out;
}

struct BandSubtraction {
  CVec difference;
  CVec residue_sum;
  double mismatch = 0.0;
  double truncation_estimate = 0.0;
  int poles_in_strip = 0;
};

/// I_{nu1} - I_{nu2} against the residue sum over poles with -nu2 < Im w < -nu1.
/// With both lines traversed left to right the rectangle between them is
/// negatively oriented, so residue_sum = -sum residue_time_term(pole, g Fhat).
inline BandSubtraction band_subtract(const RationalResolvent& R, const ForcingSpec& f,
                                     const std::optional<WindowPolynomial>& g, double nu1, double nu2, double t,
                                     const LineOptions& opt = {}) {
  require(nu1 < nu2, ErrorKind::configuration, "band needs nu1 < nu2");
  const auto i1 = line_integral(R, f, g, nu1, t, opt);
  const auto i2 = line_integral(R, f, g, nu2, t, opt);
  BandSubtraction b;
  b.difference = i1.value - i2.value;
  b.residue_sum = CVec::Zero(R.dim);
  const auto jet = forcing_jet(f, g);
  for (const auto& p : R.poles) {
    if (p.omega.imag() > -nu2 && p.omega.imag() < -nu1) {
      b.residue_sum -= residue_time_term(p, jet, t);
      ++b.poles_in_strip;
    }
  }
  b.mismatch = (b.difference - b.residue_sum).norm();
  b.truncation_estimate = i1.truncation_estimate + i2.truncation_estimate;
  return b;
}

/// P(w) = P0 + (w - w0) P1 + (w - w0)^2 P2
struct MatrixPencil {
  CMat P0, P1;
  std::optional<CMat> P2;
  cplx omega0;

  CMat operator()(cplx w) const {
    const cplx d = w - omega0;
    CMat m = P0 + d * P1;
    if (P2) m += d * d * *P2;
    return m;
  }
};

struct RankOneResidue {
  CMat projector;
  CVec u0, v0;
  cplx denom;
};

/// Residue of P(w)^-1 at w0: Pi f = <f, v0> u0 / <P1 u0, v0>.
inline RankOneResidue rank_one_residue(const MatrixPencil& P, double kernel_tol = 1e-10) {
  require(P.P0.rows() == P.P0.cols() && P.P1.rows() == P.P0.rows() && P.P1.cols() == P.P0.cols(),
          ErrorKind::configuration, "pencil matrices must be square and of equal size");
  Eigen::JacobiSVD<CMat> svd(P.P0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Eigen::Index n = s.size();
  const double top = std::max(s(0), 1e-300);
  int kernel = 0;
  for (Eigen::Index i = 0; i < n; ++i) kernel += s(i) <= kernel_tol * top;
  if (kernel != 1) fail(ErrorKind::structure, "kernel of P(w0) is not one-dimensional");
  RankOneResidue r;
  r.u0 = svd.matrixV().col(n - 1);
  r.v0 = svd.matrixU().col(n - 1);
  r.denom = r.v0.dot(P.P1 * r.u0);  // v0^H P1 u0
  if (!(std::abs(r.denom) > 1e-14 * op_norm(P.P1))) fail(ErrorKind::structure, "vanishing residue denominator");
  r.projector = r.u0 * r.v0.adjoint() / r.denom;
  return r;
}

/// (1/2pi i) closed-circle integral of P(w)^-1, n trapezoid nodes.
inline CMat cauchy_residue(const MatrixPencil& P, double radius, int n = 128) {
  CMat acc = CMat::Zero(P.P0.rows(), P.P0.cols());
  for (int j = 0; j < n; ++j) {
    const cplx e = std::polar(1.0, 2.0 * std::numbers::pi * j / n);
    acc += P(P.omega0 + radius * e).partialPivLu().inverse() * (radius * e);
  }
  return acc / double(n);
}

/// Zeros of det(P0 + mu P1) other than mu = 0, shifted to w0 + mu.
inline std::vector<cplx> pencil_other_roots(const MatrixPencil& P) {
  require(!P.P2.has_value(), ErrorKind::configuration, "root listing covers linear pencils only");
  Eigen::ComplexEigenSolver<CMat> es(-P.P1.partialPivLu().solve(P.P0));
  std::vector<cplx> out;
  double nearest = std::numeric_limits<double>::infinity();
  Eigen::Index skip = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) < nearest) {
      nearest = std::abs(es.eigenvalues()(i));
      skip = i;
    }
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (i != skip) out.push_back(P.omega0 + es.eigenvalues()(i));
  return out;
}

struct AmplitudePairing {
  cplx amplitude;
  bool excitation_singular = false;
};

/// a = (<F, v0> / <P1 u0, v0>) * detector(u0); detector is applied without conjugation.
inline AmplitudePairing amplitude_pairing(const CVec& F_at_pole, const CVec& u0, const CVec& v0, const CMat& P1,
                                          const CVec& detector) {
  AmplitudePairing a;
  const cplx denom = v0.dot(P1 * u0);
  if (denom == cplx(0.0)) {
    a.excitation_singular = true;
    a.amplitude = std::numeric_limits<double>::quiet_NaN();
    return a;
  }
  a.amplitude = (v0.dot(F_at_pole) / denom) * detector.transpose() * u0;
  return a;
}

/// Scalar model of a localized resolvent: hol + E+ E- / |q(w)|, q(w) = prod (w - w_j).
struct PseudospectrumModel {
  std::vector<cplx> poles;
  double e_plus = 1.0;
  double e_minus = 1.0;
  double hol_bound = 0.0;

  cplx q(cplx w) const {
    cplx v = 1.0;
    for (cplx p : poles) v *= (w - p);
    return v;
  }
  double norm(cplx w) const {
    const double aq = std::abs(q(w));
    return aq == 0.0 ? std::numeric_limits<double>::infinity() : hol_bound + e_plus * e_minus / aq;
  }
  /// |q(w)| >= c_q |w - w_j| on B(w_j, r_j), r_j = half the distance to the nearest other pole.
  double c_q() const {
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < poles.size(); ++j) {
      double prod = 1.0;
      for (std::size_t k = 0; k < poles.size(); ++k)
        if (k != j) prod *= 0.5 * std::abs(poles[j] - poles[k]);
      c = std::min(c, prod);
    }
    return c;
  }
  double disk_radius(std::size_t j) const {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < poles.size(); ++k)
      if (k != j) r = std::min(r, 0.5 * std::abs(poles[j] - poles[k]));
    return r;
  }
  double inclusion_constant() const { return 2.0 * e_plus * e_minus / c_q(); }
};

struct ScanGrid {
  double re_min = -1.0, re_max = 1.0, im_min = -1.0, im_max = 1.0;
  int nx = 100, ny = 100;
  double hx() const { return (re_max - re_min) / (nx - 1); }
  double hy() const { return (im_max - im_min) / (ny - 1); }
  cplx point(int i, int j) const { return {re_min + i * hx(), im_min + j * hy()}; }
};

struct PseudospectrumScan {
  double C = 0.0;          ///< disk constant, radii C eps
  bool trivial = false;    ///< eps > 1/(2 hol): inclusion not informative
  int scanned = 0;         ///< grid points inside the labeled disks
  int marked = 0;          ///< points with model norm > 1/eps
  int excluded = 0;        ///< marked points outside every B(w_j, C eps)
  double max_ratio = 0.0;  ///< max over marked points of dist to nearest pole / (C eps)
  std::vector<unsigned char> mask;  ///< row-major ny x nx, 1 = marked
};

/// Marks points of the localized eps-pseudospectrum (restricted to the disks
/// B(w_j, r_j)) and checks inclusion in the union of B(w_j, C eps).
inline PseudospectrumScan pseudospectrum_scan(const PseudospectrumModel& m, const ScanGrid& g, double eps,
                                              bool keep_mask = false) {
  require(!m.poles.empty(), ErrorKind::configuration, "model needs at least one pole");
  require(eps > 0.0, ErrorKind::configuration, "eps must be > 0");
  require(g.nx >= 2 && g.ny >= 2 && g.re_max > g.re_min && g.im_max > g.im_min, ErrorKind::configuration,
          "bad scan grid");
  require(m.e_plus > 0.0 && m.e_minus > 0.0 && m.hol_bound >= 0.0, ErrorKind::configuration, "bad model norms");
  PseudospectrumScan s;
  s.C = m.inclusion_constant();
  s.trivial = m.hol_bound > 0.0 && eps > 0.5 / m.hol_bound;
  if (std::max(g.hx(), g.hy()) > s.C * eps)
    fail(ErrorKind::resolution, "grid spacing exceeds the predicted disk radius C*eps");
  if (keep_mask) s.mask.assign(std::size_t(g.nx) * std::size_t(g.ny), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const cplx w = g.point(i, j);
      double dmin = std::numeric_limits<double>::infinity();
      bool in_disk = false;
      for (std::size_t p = 0; p < m.poles.size(); ++p) {
        const double d = std::abs(w - m.poles[p]);
        dmin = std::min(dmin, d);
        in_disk = in_disk || d < m.disk_radius(p);
      }
      if (!in_disk) continue;
      ++s.scanned;
      if (!(m.norm(w) > 1.0 / eps)) continue;
      ++s.marked;
      if (keep_mask) s.mask[std::size_t(j) * std::size_t(g.nx) + std::size_t(i)] = 1;
      s.max_ratio = std::max(s.max_ratio, dmin / (s.C * eps));
      if (dmin > s.C * eps) ++s.excluded;
    }
  return s;
}

}  // namespace ringlab
