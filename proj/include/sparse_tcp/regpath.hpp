#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sparse_tcp/tensor.hpp"

namespace sparse_tcp {

/// sum_j |u_j|^p, the p-th power of the l_p quasi-norm.
template <typename Derived>
typename Derived::Scalar lp_norm_p(const Eigen::MatrixBase<Derived>& u,
                                   typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  if (!(p > Scalar(0) && p <= Scalar(1))) {
    throw std::invalid_argument("lp_norm_p: p must lie in (0, 1]");
  }
  using std::abs;
  using std::pow;
  Scalar sum(0);
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (u[j] != Scalar(0)) sum += pow(abs(u[j]), p);
  }
  return sum;
}

/// Number of entries with |u_j| > tol_zero.
template <typename Derived>
int card(const Eigen::MatrixBase<Derived>& u, typename Derived::Scalar tol_zero) {
  using std::abs;
  int count = 0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (abs(u[j]) > tol_zero) ++count;
  }
  return count;
}

/// Componentwise max(0, -q_i).
template <typename Derived>
VectorX<typename Derived::Scalar> q_tilde(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  return (-q).cwiseMax(Scalar(0));
}

/// Constants shared by the nonzero-entry lower bound and the zero-minimizer
/// threshold.
template <typename Scalar>
struct BoundInputs {
  Scalar t;
  Scalar p;
  int m;
  /// Frobenius norm of A.
  Scalar normA;
  /// Upper bound on ||u||_2 over the local minimizers.
  Scalar mu;
  /// Objective value at the initial point.
  Scalar f0;

  void validate() const {
    using std::isfinite;
    if (!isfinite(t) || !isfinite(p) || !isfinite(normA) || !isfinite(mu) || !isfinite(f0)) {
      throw std::invalid_argument("BoundInputs: all fields must be finite");
    }
    if (!(t > Scalar(0))) throw std::invalid_argument("BoundInputs: t must be > 0");
    if (!(mu > Scalar(0))) throw std::invalid_argument("BoundInputs: mu must be > 0");
    if (!(p > Scalar(0) && p < Scalar(1))) {
      throw std::invalid_argument("BoundInputs: p must lie in (0, 1)");
    }
    if (normA < Scalar(0) || f0 < Scalar(0)) {
      throw std::invalid_argument("BoundInputs: normA and f0 must be >= 0");
    }
    if (m < 2) throw std::invalid_argument("BoundInputs: m must be >= 2");
  }

  /// 2 sqrt(2) (1 + (m - 1) ||A|| mu^{m-2}).
  Scalar gradient_constant() const {
    using std::pow;
    using std::sqrt;
    return Scalar(2) * sqrt(Scalar(2)) *
           (Scalar(1) + Scalar(m - 1) * normA * pow(mu, Scalar(m - 2)));
  }
};

enum class LowerBoundForm {
  /// Carries the sqrt(f0) factor of the first-order argument.
  kWithObjective,
  /// Omits sqrt(f0).
  kStatement,
};

/// Every nonzero entry of a local minimizer u* with f(u*) <= f0 satisfies
/// |u*_i| >= L. Throws std::domain_error when f0 = 0 (already optimal).
template <typename Scalar>
Scalar lower_bound_L(const BoundInputs<Scalar>& b,
                     LowerBoundForm form = LowerBoundForm::kWithObjective) {
  b.validate();
  using std::pow;
  using std::sqrt;
  Scalar denom = b.gradient_constant();
  if (form == LowerBoundForm::kWithObjective) {
    if (b.f0 == Scalar(0)) throw std::domain_error("already at global minimum (f0 = 0)");
    denom *= sqrt(b.f0);
  }
  return pow(b.t * b.p / denom, Scalar(1) / (Scalar(1) - b.p));
}

/// gamma(k) = k^{p-1} (C / p)^p sqrt(f0)^{2-p}; t >= gamma(k) forces fewer than
/// k nonzeros, and t >= gamma(1) makes 0 the unique minimizer.
template <typename Scalar>
Scalar gamma_k(int k, const BoundInputs<Scalar>& b) {
  if (k < 1) throw std::invalid_argument("gamma_k: k must be >= 1");
  b.validate();
  using std::pow;
  using std::sqrt;
  return pow(Scalar(k), b.p - Scalar(1)) * pow(b.gradient_constant() / b.p, b.p) *
         pow(sqrt(b.f0), Scalar(2) - b.p);
}

/// n^{1/p - 1/2} B: bound on the local minimizers given ||u|| <= B over SOL.
template <typename Scalar>
Scalar compute_Bbar(int n, Scalar p, Scalar B) {
  if (!(B > Scalar(0))) throw std::invalid_argument("compute_Bbar: B must be > 0");
  using std::pow;
  return pow(Scalar(n), Scalar(1) / p - Scalar(0.5)) * B;
}

/// 2 ||q~||^2 / ||ubar||_p^p. For t at or below this value 0 is not a global
/// minimizer whenever ubar is a nonzero solution.
template <typename Scalar>
Scalar t_upper_for_nonzero(const VectorX<Scalar>& q, const VectorX<Scalar>& ubar, Scalar p) {
  const Scalar denom = lp_norm_p(ubar, p);
  if (denom == Scalar(0)) throw std::invalid_argument("t_upper_for_nonzero: ubar = 0");
  return Scalar(2) * q_tilde(q).squaredNorm() / denom;
}

/// Geometric continuation schedule t_k = t0 factor^k, k = 0 .. steps - 1.
struct Schedule {
  double t0 = 1e-1;
  double factor = 0.5;
  int steps = 12;

  double at(int k) const { return t0 * std::pow(factor, k); }
  double last() const { return at(steps - 1); }
};

inline Schedule make_schedule(double t0, double factor, int steps) {
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw std::invalid_argument("schedule: t0 must be > 0");
  if (!(factor > 0.0 && factor < 1.0)) {
    throw std::invalid_argument("schedule: factor must lie in (0, 1)");
  }
  if (steps < 1) throw std::invalid_argument("schedule: steps must be >= 1");
  return Schedule{t0, factor, steps};
}

inline double next_t(const Schedule& s, int k) {
  if (k < 0) throw std::invalid_argument("schedule: k must be >= 0");
  return s.at(k);
}

/// Zeroes every entry with |u_i| < L.
template <typename Derived>
VectorX<typename Derived::Scalar> threshold_by_L(const Eigen::MatrixBase<Derived>& u,
                                                 typename Derived::Scalar L) {
  using Scalar = typename Derived::Scalar;
  if (!(L > Scalar(0))) throw std::invalid_argument("threshold_by_L: L must be > 0");
  VectorX<Scalar> out = u;
  using std::abs;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (abs(out[i]) < L) out[i] = Scalar(0);
  }
  return out;
}

}  // namespace sparse_tcp
