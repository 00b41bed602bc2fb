#pragma once

#include <ringlab/error.hpp>
#include <ringlab/signal_model.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

namespace ringlab {

/// sqrt(1 - 9 Lambda M^2) / (3 sqrt(3) M); zero at the Nariai limit 9 Lambda M^2 = 1.
inline double photon_sphere_frequency(double M, double Lambda) {
  require(M > 0.0, ErrorKind::configuration, "mass must be > 0");
  require(Lambda >= 0.0, ErrorKind::configuration, "Lambda must be >= 0");
  const double x = 9.0 * Lambda * M * M;
  if (x > 1.0) fail(ErrorKind::configuration, "9 Lambda M^2 > 1: photon-sphere frequency not real");
  return std::sqrt(1.0 - x) / (3.0 * std::sqrt(3.0) * M);
}

struct ParameterPoint {
  double M = 1.0;
  double a = 0.0;
  double Lambda = 0.0;
};

enum class DataMode { two_param, three_param };

inline int dimension(DataMode m) { return m == DataMode::two_param ? 2 : 3; }

inline Eigen::VectorXd to_vector(const ParameterPoint& p, DataMode m) {
  Eigen::VectorXd x(dimension(m));
  x(0) = p.M;
  x(1) = p.a;
  if (m == DataMode::three_param) x(2) = p.Lambda;
  return x;
}

/// Inverse of to_vector; in two-parameter mode Lambda is taken from `base`.
inline ParameterPoint from_vector(const Eigen::VectorXd& x, DataMode m, const ParameterPoint& base) {
  ParameterPoint p = base;
  p.M = x(0);
  p.a = x(1);
  if (m == DataMode::three_param) p.Lambda = x(2);
  return p;
}

enum class UMode { omega_ph, constant };
enum class LamMode { omega_ph, constant, mass_only };

/// Synthetic pseudopole lattice w#_{j,+-} = ell (u +- v) - i (j + 1/2) lam.
struct LatticeModel {
  int ell = 100;
  int n = 0;
  double kappa = 0.3;
  UMode u_mode = UMode::omega_ph;
  double u_const = 0.2;
  LamMode lam_mode = LamMode::omega_ph;
  double lam_const = 0.2;
  std::map<std::pair<int, int>, cplx> offsets;  ///< (j, sign) -> pole minus pseudopole

  void validate() const {
    require(ell >= 1, ErrorKind::configuration, "ell must be >= 1");
    require(n >= 0, ErrorKind::configuration, "overtone n must be >= 0");
    require(kappa > 0.0, ErrorKind::configuration, "kappa must be > 0");
    if (lam_mode == LamMode::constant) require(lam_const > 0.0, ErrorKind::configuration, "lam must be > 0");
    for (const auto& [key, off] : offsets) {
      require(key.second == 1 || key.second == -1, ErrorKind::configuration, "offset sign must be +1 or -1");
      require(std::isfinite(off.real()) && std::isfinite(off.imag()), ErrorKind::configuration, "offset not finite");
    }
  }

  double u(const ParameterPoint& p) const {
    return u_mode == UMode::omega_ph ? photon_sphere_frequency(p.M, p.Lambda) : u_const;
  }
  double v(const ParameterPoint& p) const { return kappa * p.a; }
  double lam(const ParameterPoint& p) const {
    switch (lam_mode) {
      case LamMode::omega_ph: return photon_sphere_frequency(p.M, p.Lambda);
      case LamMode::constant: return lam_const;
      case LamMode::mass_only:
        require(p.M > 0.0, ErrorKind::configuration, "mass must be > 0");
        return 1.0 / (3.0 * std::sqrt(3.0) * p.M);
    }
    return 0.0;
  }

  cplx pseudopole(int j, int sign, const ParameterPoint& p) const {
    require(sign == 1 || sign == -1, ErrorKind::configuration, "sign must be +1 or -1");
    require(j >= 0, ErrorKind::configuration, "overtone index must be >= 0");
    return {ell * (u(p) + sign * v(p)), -(j + 0.5) * lam(p)};
  }

  cplx pole(int j, int sign, const ParameterPoint& p) const {
    const auto it = offsets.find({j, sign});
    return pseudopole(j, sign, p) + (it == offsets.end() ? cplx(0.0) : it->second);
  }
};

struct Observables {
  double U = 0.0;
  double V = 0.0;
  double W = 0.0;  ///< -Im w+ / (n + 1/2)

  Eigen::VectorXd vec(DataMode m) const {
    Eigen::VectorXd x(dimension(m));
    x(0) = U;
    x(1) = V;
    if (m == DataMode::three_param) x(2) = W;
    return x;
  }
};

inline Observables observables(cplx omega_plus, cplx omega_minus, int ell, int n) {
  require(ell >= 1, ErrorKind::configuration, "ell must be >= 1");
  require(n >= 0, ErrorKind::configuration, "n must be >= 0");
  return {(omega_plus + omega_minus).real() / (2.0 * ell), (omega_plus - omega_minus).real() / (2.0 * ell),
          -omega_plus.imag() / (n + 0.5)};
}

/// Same map applied to extracted frequencies.
inline Observables estimated_data(cplx omega_hat_plus, cplx omega_hat_minus, int ell, int n) {
  return observables(omega_hat_plus, omega_hat_minus, ell, n);
}

/// |Ghat - G| <= (sqrt 2 / 2 ell)(|dw+| + |dw-|)
inline double data_error_bound(cplx d_plus, cplx d_minus, int ell) {
  return std::sqrt(2.0) / (2.0 * ell) * (std::abs(d_plus) + std::abs(d_minus));
}

/// Three-component analogue: adds |dw+| / (n + 1/2) for the damping observable.
inline double data_error_bound_3p(cplx d_plus, cplx d_minus, int ell, int n) {
  return data_error_bound(d_plus, d_minus, ell) + std::abs(d_plus) / (n + 0.5);
}

/// Data map on the true poles of overtone model.n.
inline Eigen::VectorXd data_map(const LatticeModel& model, const ParameterPoint& p, DataMode m) {
  const cplx wp = model.pole(model.n, 1, p), wm = model.pole(model.n, -1, p);
  return observables(wp, wm, model.ell, model.n).vec(m);
}

struct ParameterBox {
  double M_lo = 0.9, M_hi = 1.1;
  double a_lo = 0.05, a_hi = 0.3;
  double L_lo = 0.002, L_hi = 0.03;

  void validate(DataMode m) const {
    require(M_lo > 0.0 && M_lo <= M_hi, ErrorKind::configuration, "bad M range");
    require(a_lo <= a_hi, ErrorKind::configuration, "bad a range");
    if (m == DataMode::three_param) {
      require(L_lo > 0.0 && L_lo <= L_hi, ErrorKind::configuration, "bad Lambda range");
      require(a_lo > 0.0 || a_hi < 0.0, ErrorKind::configuration, "three-parameter box needs |a| >= a1 > 0");
    }
  }
  bool contains(const ParameterPoint& p, DataMode m) const {
    const bool ok = p.M >= M_lo && p.M <= M_hi && p.a >= a_lo && p.a <= a_hi;
    return m == DataMode::two_param ? ok : ok && p.Lambda >= L_lo && p.Lambda <= L_hi;
  }
};

inline constexpr double kJacobianStep = 1e-6;

/// Central-difference Jacobian of a map R^d -> R^d, step kJacobianStep * max(1, |x_i|).
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double rel_step = kJacobianStep) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd J(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

inline std::function<Eigen::VectorXd(const Eigen::VectorXd&)> data_map_fn(const LatticeModel& model, DataMode m,
                                                                          const ParameterPoint& base) {
  return [&model, m, base](const Eigen::VectorXd& x) { return data_map(model, from_vector(x, m, base), m); };
}

struct InversionResult {
  ParameterPoint p;
  int iterations = 0;
  double residual = 0.0;
};

/// Damped Newton on p -> data_map(p) with a finite-difference Jacobian. The
/// iterate must stay inside `box`.
inline InversionResult invert_data(const LatticeModel& model, const Eigen::VectorXd& data, const ParameterPoint& guess,
                                   DataMode m, const ParameterBox& box, double tol = 1e-12, int max_iter = 50) {
  model.validate();
  box.validate(m);
  require(data.size() == dimension(m), ErrorKind::configuration, "data dimension does not match the mode");
  require(box.contains(guess, m), ErrorKind::inversion, "initial guess outside the parameter box");
  const auto G = data_map_fn(model, m, guess);
  Eigen::VectorXd x = to_vector(guess, m);
  auto resid = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return G(y) - data; };
  InversionResult out;
  Eigen::VectorXd r = resid(x);
  for (int it = 0; it <= max_iter; ++it) {
    out.iterations = it;
    out.residual = r.lpNorm<Eigen::Infinity>();
    if (out.residual < tol) {
      out.p = from_vector(x, m, guess);
      return out;
    }
    if (it == max_iter) break;
    const Eigen::MatrixXd J = fd_jacobian(G, x);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (lu.rank() < J.rows() || std::abs(J.determinant()) < 1e-14 * std::max(1.0, J.norm()))
      fail(ErrorKind::inversion, "data-map Jacobian is singular");
    const Eigen::VectorXd step = lu.solve(r);
    double damp = 1.0;
    Eigen::VectorXd xn;
    Eigen::VectorXd rn;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      xn = x - damp * step;
      const auto pn = from_vector(xn, m, guess);
      if (pn.M > 0.0 && 9.0 * pn.Lambda * pn.M * pn.M < 1.0 && pn.Lambda >= 0.0) {
        rn = resid(xn);
        if (rn.norm() < r.norm() || rn.lpNorm<Eigen::Infinity>() < tol) {
          accepted = true;
          break;
        }
      }
      damp *= 0.5;
    }
    if (!accepted) fail(ErrorKind::inversion, "Newton line search failed");
    if (!box.contains(from_vector(xn, m, guess), m)) fail(ErrorKind::inversion, "Newton iterate left the parameter box");
    x = xn;
    r = rn;
  }
  fail(ErrorKind::inversion, "Newton did not converge in the iteration limit");
}

struct InverseConstants {
  double c_star = 0.0;  ///< min |det DG| over the grid
  double C_star = 0.0;  ///< max ||DG^-1||_2 over the grid
  int grid_n = 0;
  double fd_step = kJacobianStep;
};

/// Grid extrema of |det J| and ||J^-1||_2 over the box [lo, hi] (grid_n points per axis).
inline InverseConstants inverse_constants(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& G,
                                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int grid_n) {
  require(lo.size() == hi.size() && lo.size() >= 1, ErrorKind::configuration, "box bounds mismatch");
  require(grid_n >= 1, ErrorKind::configuration, "grid_n must be >= 1");
  const Eigen::Index d = lo.size();
  InverseConstants c;
  c.grid_n = grid_n;
  c.c_star = std::numeric_limits<double>::infinity();
  std::vector<int> idx(std::size_t(d), 0);
  while (true) {
    Eigen::VectorXd x(d);
    for (Eigen::Index i = 0; i < d; ++i)
      x(i) = grid_n == 1 ? 0.5 * (lo(i) + hi(i)) : lo(i) + (hi(i) - lo(i)) * idx[std::size_t(i)] / (grid_n - 1);
    const Eigen::MatrixXd J = fd_jacobian(G, x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const double smin = svd.singularValues()(d - 1);
    if (!(smin > 1e-13 * std::max(1.0, svd.singularValues()(0))))
      fail(ErrorKind::inversion, "singular data-map Jacobian on the constants grid");
    c.c_star = std::min(c.c_star, std::abs(J.determinant()));
    c.C_star = std::max(c.C_star, 1.0 / smin);
    Eigen::Index k = 0;
    while (k < d && ++idx[std::size_t(k)] == grid_n) idx[std::size_t(k++)] = 0;
    if (k == d) break;
  }
  return c;
}

inline InverseConstants inverse_constants(const LatticeModel& model, const ParameterBox& box, int grid_n, DataMode m,
                                          double Lambda_2p = 0.0) {
  model.validate();
  box.validate(m);
  ParameterPoint base;
  base.Lambda = Lambda_2p;
  const auto G = data_map_fn(model, m, base);
  Eigen::VectorXd lo(dimension(m)), hi(dimension(m));
  lo(0) = box.M_lo;
  hi(0) = box.M_hi;
  lo(1) = box.a_lo;
  hi(1) = box.a_hi;
  if (m == DataMode::three_param) {
    lo(2) = box.L_lo;
    hi(2) = box.L_hi;
  }
  return inverse_constants(G, lo, hi, grid_n);
}

/// (5 sqrt2 C* / (Delta ell)) (eps+/|z+| + eps-/|z-|)
inline double bias_bound_2p(double eps_plus, double eps_minus, double z_plus, double z_minus, double delta, int ell,
                            double C_star) {
  require(delta > 0.0 && ell >= 1 && z_plus > 0.0 && z_minus > 0.0, ErrorKind::configuration, "bad bias-bound inputs");
  return 5.0 * std::sqrt(2.0) * C_star / (delta * ell) * (eps_plus / z_plus + eps_minus / z_minus);
}

/// Two-parameter bound plus (10 C*3 / (Delta (n + 1/2))) eps+/|z+| from the damping observable.
inline double bias_bound_3p(double eps_plus, double eps_minus, double z_plus, double z_minus, double delta, int ell,
                            int n, double C_star3) {
  require(n >= 0, ErrorKind::configuration, "n must be >= 0");
  return bias_bound_2p(eps_plus, eps_minus, z_plus, z_minus, delta, ell, C_star3) +
         10.0 * C_star3 / (delta * (n + 0.5)) * eps_plus / z_plus;
}

struct BiasSplit {
  double tail = 0.0;
  double meas = 0.0;
  double total() const { return tail + meas; }
};

/// Tail and measurement parts of the two-parameter bound.
inline BiasSplit bias_bound_split(double tail_plus, double tail_minus, double meas_plus, double meas_minus,
                                  double z_plus, double z_minus, double delta, int ell, double C_star) {
  return {bias_bound_2p(tail_plus, tail_minus, z_plus, z_minus, delta, ell, C_star),
          bias_bound_2p(meas_plus, meas_minus, z_plus, z_minus, delta, ell, C_star)};
}

struct BiasConstants {
  double C_star = 0.0;
  double c_star = 0.0;
  int ell = 1;
  double Delta = 1.0;
  double z_plus = 1.0;
  double z_minus = 1.0;
};

struct BiasReport {
  cplx delta_omega_plus{};
  cplx delta_omega_minus{};
  double data_err = 0.0;
  double param_err = 0.0;
  double bound_2p = 0.0;
  double bound_3p = 0.0;
  double bound_tail = 0.0;
  double bound_meas = 0.0;
  BiasConstants constants;
};

/// Hypothesis of the bias theorems: eps <= min(1/8, |z|/20).
inline bool bias_hypothesis(double eps, double z_abs) { return eps <= std::min(0.125, z_abs / 20.0); }

}  // namespace ringlab
