#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sparse_tcp/instance.hpp"
#include "sparse_tcp/regpath.hpp"
#include "sparse_tcp/tensor.hpp"

namespace sparse_tcp {

/// Fischer-Burmeister function sqrt(a^2 + b^2) - (a + b). Zero exactly when
/// a >= 0, b >= 0 and ab = 0.
template <typename Scalar>
Scalar phi_fb(Scalar a, Scalar b) {
  using std::hypot;
  const Scalar r = hypot(a, b);
  // Rationalized form avoids cancellation when a + b > 0.
  if (a + b > Scalar(0)) return Scalar(-2) * a * b / (r + a + b);
  return r - (a + b);
}

/// Subgradient parameters (rho, xi) used where (u_i, w_i) = (0, 0).
struct FbGradConfig {
  double rho = 0.0;
  double xi = 0.0;

  FbGradConfig() = default;
  FbGradConfig(double rho_in, double xi_in) : rho(rho_in), xi(xi_in) {
    if (!(std::hypot(rho, xi) <= 1.0)) {
      throw std::invalid_argument("FbGradConfig: ||(rho, xi)|| must be <= 1");
    }
  }
};

struct ObjectiveParams {
  double t = 1e-1;
  double p = 0.5;

  ObjectiveParams() = default;
  ObjectiveParams(double t_in, double p_in) : t(t_in), p(p_in) { validate(); }

  void validate() const {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("ObjectiveParams: t must be > 0");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ObjectiveParams: p must lie in (0, 1)");
  }
};

/// w = A u^{m-1} + q.
template <typename Scalar>
VectorX<Scalar> tcp_map(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& q,
                        const VectorArg<Scalar>& u) {
  if (q.size() != A.dim()) throw std::invalid_argument("dim: q length != tensor dimension");
  return contract_m1(A, u) + q;
}

/// Phi_FB(u)_i = phi_fb(u_i, (A u^{m-1} + q)_i).
template <typename Scalar>
VectorX<Scalar> residual_fb(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& q,
                            const VectorArg<Scalar>& u) {
  const VectorX<Scalar> w = tcp_map(A, q, u);
  VectorX<Scalar> r(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) r[i] = phi_fb(u[i], w[i]);
  return r;
}

/// Psi_FB(u) = 0.5 ||Phi_FB(u)||^2.
template <typename Scalar>
Scalar merit_fb(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& q,
                const VectorArg<Scalar>& u) {
  return Scalar(0.5) * residual_fb(A, q, u).squaredNorm();
}

/// Gradient of Psi_FB:
///   [D_v + (m - 1) (A u^{m-2})^T D_z] Phi_FB(u)
/// with v_i = u_i / r_i - 1, z_i = w_i / r_i - 1, r_i = ||(u_i, w_i)||, and
/// (v_i, z_i) = (rho - 1, xi - 1) where r_i = 0. Row i of (m - 1) A u^{m-2}
/// is the gradient of w_i, hence the transpose.
template <typename Scalar>
VectorX<Scalar> grad_merit(const SemiSymmetricTensor<Scalar>& sym, const VectorArg<Scalar>& q,
                           const VectorArg<Scalar>& u, const FbGradConfig& cfg = {}) {
  const DenseTensor<Scalar>& A = sym.tensor();
  const VectorX<Scalar> w = tcp_map(A, q, u);
  const Eigen::Index n = u.size();
  VectorX<Scalar> dv(n), dz(n), phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    using std::hypot;
    const Scalar r = hypot(u[i], w[i]);
    phi[i] = phi_fb(u[i], w[i]);
    if (r > Scalar(0)) {
      dv[i] = u[i] / r - Scalar(1);
      dz[i] = w[i] / r - Scalar(1);
    } else {
      dv[i] = Scalar(cfg.rho) - Scalar(1);
      dz[i] = Scalar(cfg.xi) - Scalar(1);
    }
  }
  const MatrixX<Scalar> M = contract_m2(A, u);
  return dv.cwiseProduct(phi) +
         Scalar(A.order() - 1) * (M.transpose() * dz.cwiseProduct(phi));
}

/// Psi_FB(u) + t sum |u_i|^p.
template <typename Scalar>
Scalar objective(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& q, const VectorArg<Scalar>& u,
                 const ObjectiveParams& params) {
  params.validate();
  return merit_fb(A, q, u) + Scalar(params.t) * lp_norm_p(u, Scalar(params.p));
}

// Instance overloads.

inline Vector residual_fb(const Instance& inst, const Vector& u) {
  return residual_fb(inst.A, inst.q, u);
}

inline double merit_fb(const Instance& inst, const Vector& u) {
  return merit_fb(inst.A, inst.q, u);
}

inline double objective(const Instance& inst, const Vector& u, const ObjectiveParams& params) {
  return objective(inst.A, inst.q, u, params);
}

/// Throws std::invalid_argument unless inst.A is semi-symmetric.
inline Vector grad_merit(const Instance& inst, const Vector& u, const FbGradConfig& cfg = {}) {
  return grad_merit(SemiSymmetricTensor<double>::checked(inst.A, 1e-14), inst.q, u, cfg);
}

/// Feasibility and complementarity residuals of a candidate point.
struct ResidualReport {
  double feas_u = 0.0;
  double feas_w = 0.0;
  double comp = 0.0;
  double fb_norm = 0.0;
  std::vector<int> support;
  double tol_zero = 1e-9;
};

inline ResidualReport compute_residuals(const Instance& inst, const Vector& u,
                                        double tol_zero = 1e-9) {
  const Vector w = tcp_map(inst.A, inst.q, u);
  ResidualReport r;
  r.tol_zero = tol_zero;
  r.feas_u = std::max(0.0, -u.minCoeff());
  r.feas_w = std::max(0.0, -w.minCoeff());
  r.comp = std::abs(u.dot(w));
  r.fb_norm = residual_fb(inst, u).norm();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > tol_zero) r.support.push_back(static_cast<int>(i));
  }
  return r;
}

struct GradCheckResult {
  /// max_i |g_i - fd_i| / max(1, ||fd||_inf).
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  Vector analytic;
  Vector numeric;
};

/// Compares grad_merit against central differences of merit_fb. Throws
/// std::domain_error when some ||(u_i, w_i)|| < degenerate_tol, where the
/// merit is not twice differentiable and differences are unreliable.
inline GradCheckResult grad_check(const SemiSymmetricTensor<double>& sym, const Vector& q,
                                  const Vector& u, const FbGradConfig& cfg = {},
                                  double step = 1e-5, double degenerate_tol = 1e-8) {
  const Vector w = tcp_map(sym.tensor(), q, u);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::hypot(u[i], w[i]) < degenerate_tol) {
      throw std::domain_error("grad_check: degenerate pair (u_i, w_i) ~ (0, 0) at index " +
                              std::to_string(i));
    }
  }
  GradCheckResult res;
  res.analytic = grad_merit(sym, q, u, cfg);
  res.numeric.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    Vector up = u, dn = u;
    up[i] += step;
    dn[i] -= step;
    res.numeric[i] =
        (merit_fb(sym.tensor(), q, up) - merit_fb(sym.tensor(), q, dn)) / (2.0 * step);
  }
  res.max_abs_error = (res.analytic - res.numeric).lpNorm<Eigen::Infinity>();
  res.max_rel_error = res.max_abs_error / std::max(1.0, res.numeric.lpNorm<Eigen::Infinity>());
  return res;
}

}  // namespace sparse_tcp
