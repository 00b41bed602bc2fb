#pragma once

#include <ringlab/error.hpp>
#include <ringlab/fd_stencil.hpp>
#include <ringlab/signal_model.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace ringlab {

/// Distinct pseudopole nodes with their cached minimal separation d#.
class PseudopoleSet {
 public:
  explicit PseudopoleSet(std::vector<cplx> nodes) : nodes_(std::move(nodes)) {
    require(!nodes_.empty(), ErrorKind::configuration, "pseudopole set is empty");
    min_sep_ = min_separation(nodes_);
    require(min_sep_ > 0.0, ErrorKind::configuration, "repeated pseudopole nodes (d# = 0)");
  }

  static double min_separation(const std::vector<cplx>& v) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) d = std::min(d, std::abs(v[i] - v[j]));
    return d;
  }

  const std::vector<cplx>& nodes() const { return nodes_; }
  cplx operator[](std::size_t i) const { return nodes_[i]; }
  int n() const { return static_cast<int>(nodes_.size()) - 1; }
  double min_sep() const { return min_sep_; }

 private:
  std::vector<cplx> nodes_;
  double min_sep_ = 0.0;
};

/// Entire window g(w) = (w/W_t)^m0 * prod_{j != t} (w - W_j)/(W_t - W_j).
///
/// Kept in factored form for evaluation and Taylor expansion; the expanded
/// monomial coefficients are cached for differential-operator use.
class WindowPolynomial {
 public:
  WindowPolynomial(PseudopoleSet nodes, int target, int m0) : nodes_(std::move(nodes)), target_(target), m0_(m0) {
    require(target >= 0 && target <= nodes_.n(), ErrorKind::configuration, "window target index out of range");
    require(m0 >= 0, ErrorKind::configuration, "m0 must be >= 0");
    target_value_ = nodes_[std::size_t(target)];
    if (m0_ > 0) require(target_value_ != cplx(0.0), ErrorKind::configuration, "target node is 0; normalizer vanishes");
    for (int k = 0; k < m0_; ++k) factors_.push_back({cplx(0.0), target_value_});
    for (int j = 0; j <= nodes_.n(); ++j)
      if (j != target_) factors_.push_back({nodes_[std::size_t(j)], target_value_ - nodes_[std::size_t(j)]});
    coeffs_ = {cplx(1.0)};
    for (const auto& f : factors_) {
      std::vector<cplx> next(coeffs_.size() + 1, cplx(0.0));
      for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        next[k] -= coeffs_[k] * f.root / f.scale;
        next[k + 1] += coeffs_[k] / f.scale;
      }
      coeffs_ = std::move(next);
    }
  }

  /// g == 1
  static WindowPolynomial identity() { return WindowPolynomial(PseudopoleSet({cplx(1.0)}), 0, 0); }

  const PseudopoleSet& nodes() const { return nodes_; }
  int target() const { return target_; }
  int m0() const { return m0_; }
  cplx target_value() const { return target_value_; }
  int degree() const { return nodes_.n() + m0_; }

  cplx operator()(cplx w) const {
    cplx v = 1.0;
    for (const auto& f : factors_) v *= (w - f.root) / f.scale;
    return v;
  }

  /// Taylor coefficients g^(k)(w)/k!, k = 0..r.
  std::vector<cplx> taylor(cplx w, int r) const {
    std::vector<cplx> t(std::size_t(r + 1), cplx(0.0));
    t[0] = 1.0;
    for (const auto& f : factors_) {
      const cplx c0 = (w - f.root) / f.scale, c1 = 1.0 / f.scale;
      for (int k = r; k >= 0; --k) t[std::size_t(k)] = t[std::size_t(k)] * c0 + (k > 0 ? t[std::size_t(k - 1)] * c1 : 0.0);
    }
    return t;
  }

  cplx derivative(cplx w, int r) const {
    if (r > degree()) return 0.0;
    double fact = 1.0;
    for (int k = 2; k <= r; ++k) fact *= k;
    return taylor(w, r)[std::size_t(r)] * fact;
  }

  /// Ascending monomial coefficients.
  const std::vector<cplx>& coefficients() const { return coeffs_; }
  cplx leading_coefficient() const { return coeffs_.back(); }

 private:
  struct Factor {
    cplx root;
    cplx scale;
  };
  PseudopoleSet nodes_;
  int target_ = 0;
  int m0_ = 0;
  cplx target_value_{1.0};
  std::vector<Factor> factors_;
  std::vector<cplx> coeffs_;
};

inline WindowPolynomial lagrange_weight(const PseudopoleSet& nodes, int m) { return WindowPolynomial(nodes, m, 0); }

/// Default target n and m0 = n + 2 when negative values are passed.
inline WindowPolynomial modified_window(const PseudopoleSet& nodes, int target = -1, int m0 = -1) {
  const int n = nodes.n();
  return WindowPolynomial(nodes, target < 0 ? n : target, m0 < 0 ? n + 2 : m0);
}

inline std::vector<double> growth_profile(const WindowPolynomial& w, double nu, const std::vector<double>& sigma_grid,
                                          int r) {
  std::vector<double> out;
  out.reserve(sigma_grid.size());
  for (double s : sigma_grid) out.push_back(std::abs(w.derivative(cplx(s, -nu), r)));
  return out;
}

/// 4 (5/3)^n
inline double lagrange_robustness_constant(int n) { return 4.0 * std::pow(5.0 / 3.0, n); }

struct RobustnessReport {
  double dev_target = 0.0;
  std::vector<double> dev_off;  ///< indexed by node, entry at the target is 0
  double delta = 0.0;
  double d_sharp = 0.0;
  bool hypothesis_ok = false;  ///< delta <= d#/8
  double bound = 0.0;          ///< 4 (5/3)^n delta / d#
};

/// Lagrange weight G_m built on `nodes`, evaluated at the perturbed points.
inline RobustnessReport interp_robustness(const PseudopoleSet& nodes, const std::vector<cplx>& perturbed, int m) {
  require(perturbed.size() == nodes.nodes().size(), ErrorKind::configuration, "perturbed node count mismatch");
  const auto g = lagrange_weight(nodes, m);
  RobustnessReport rep;
  rep.d_sharp = nodes.min_sep();
  for (std::size_t j = 0; j < perturbed.size(); ++j) rep.delta = std::max(rep.delta, std::abs(perturbed[j] - nodes[j]));
  rep.hypothesis_ok = rep.delta <= rep.d_sharp / 8.0;
  rep.bound = lagrange_robustness_constant(nodes.n()) * rep.delta / rep.d_sharp;
  rep.dev_off.assign(perturbed.size(), 0.0);
  for (std::size_t j = 0; j < perturbed.size(); ++j) {
    if (int(j) == m)
      rep.dev_target = std::abs(g(perturbed[j]) - 1.0);
    else
      rep.dev_off[j] = std::abs(g(perturbed[j]));
  }
  return rep;
}

struct PriorMismatch {
  double delta = 0.0;
  double d_sharp = 0.0;
  double ratio = 0.0;
};

inline PriorMismatch prior_mismatch(const std::vector<cplx>& nodes_p, const std::vector<cplx>& nodes_ptilde) {
  require(nodes_p.size() == nodes_ptilde.size(), ErrorKind::configuration, "node count mismatch");
  PriorMismatch r;
  for (std::size_t j = 0; j < nodes_p.size(); ++j) r.delta = std::max(r.delta, std::abs(nodes_p[j] - nodes_ptilde[j]));
  r.d_sharp = PseudopoleSet::min_separation(nodes_ptilde);
  r.ratio = r.delta / r.d_sharp;
  return r;
}

inline std::vector<Mode> apply_window_modal(const std::vector<Mode>& modes, const WindowPolynomial& w) {
  std::vector<Mode> out = modes;
  for (auto& m : out) {
    require(m.poly_degree == 0, ErrorKind::configuration, "modal window path supports pure exponentials only");
    m.amp *= w(m.freq.value());
  }
  return out;
}

/// Minimal half-width of the centered stencils used by apply_window_fd.
inline int fd_half_width(const WindowPolynomial& w, int stencil_order) {
  int M = 0;
  for (int k = 1; k <= w.degree(); ++k) M = std::max(M, centered_half_width(k, stencil_order));
  return M;
}

/// Applies g(i d/dt) with centered stencils of accuracy `stencil_order`.
/// The output drops the stencil half-width at both ends of the grid.
inline SampledSignal apply_window_fd(const SampledSignal& signal, const WindowPolynomial& w, int stencil_order = 8) {
  require(stencil_order >= 2 && stencil_order % 2 == 0, ErrorKind::configuration, "stencil order must be even");
  const int deg = w.degree();
  const int M = fd_half_width(w, stencil_order);
  const long n_out = long(signal.size()) - 2L * M;
  require(n_out >= 4, ErrorKind::configuration, "insufficient samples for the finite-difference window");
  const auto& c = w.coefficients();

  // Combined stencil: sum_k c_k i^k dt^-k D_k, on offsets -M..M.
  std::vector<cplx> stencil(std::size_t(2 * M + 1), cplx(0.0));
  cplx ik = 1.0;
  double hk = 1.0;
  for (int k = 0; k <= deg; ++k) {
    const auto wk = centered_weights(k, stencil_order);
    const int mk = (int(wk.size()) - 1) / 2;
    for (int s = -mk; s <= mk; ++s) stencil[std::size_t(M + s)] += c[std::size_t(k)] * ik * hk * wk[std::size_t(mk + s)];
    ik *= kI;
    hk /= signal.dt;
  }

  SampledSignal out;
  out.dt = signal.dt;
  out.t_start = signal.t_start + M * signal.dt;
  out.values.resize(std::size_t(n_out));
  for (long j = 0; j < n_out; ++j) {
    cplx acc = 0.0;
    for (int s = 0; s <= 2 * M; ++s) acc += stencil[std::size_t(s)] * signal.values[std::size_t(j + s)];
    out.values[std::size_t(j)] = acc;
  }
  return out;
}

}  // namespace ringlab
