#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse_tcp/instance.hpp"
#include "sparse_tcp/merit.hpp"
#include "sparse_tcp/oracle.hpp"
#include "sparse_tcp/regpath.hpp"

namespace sparse_tcp {

struct SolveOptions {
  /// params.p is the quasi-norm exponent. params.t is the fixed
  /// regularization weight for minimize_local; solve_sparse_tcp takes its
  /// weights from the schedule instead.
  ObjectiveParams params{1e-1, 0.5};
  Schedule schedule{1e-1, 0.5, 12};
  double eps0 = 1e-1;
  double eps_factor = 0.3;
  double eps_min = 1e-10;
  int max_outer = 20;
  int max_inner = 500;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double grad_tol = 1e-8;
  double residual_tol = 1e-6;
  int starts = 5;
  std::uint64_t seed = 0;
  bool polish = true;
  FbGradConfig fb_config{};
  LowerBoundForm lower_bound_form = LowerBoundForm::kWithObjective;
  /// Bound on ||u||_2 over local minimizers; when unset it is
  /// compute_Bbar(n, p, max(1, largest iterate norm)).
  std::optional<double> mu;
  /// Record the true objective after every accepted inner step.
  bool record_trace = false;

  /// Throws std::invalid_argument on an out-of-range field.
  void validate() const;
};

/// t sum (u_i^2 + eps^2)^{p/2}, a C^infinity surrogate of t ||u||_p^p.
double smooth_penalty(const Vector& u, const ObjectiveParams& params, double eps);

/// Psi_FB(u) + smooth_penalty(u).
double smooth_objective(const Instance& inst, const Vector& u, const ObjectiveParams& params,
                        double eps);

Vector smooth_grad(const SemiSymmetricTensor<double>& sym, const Vector& q, const Vector& u,
                   const ObjectiveParams& params, double eps, const FbGradConfig& cfg = {});

/// The objective became non-finite during minimization.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& what, Vector iterate)
      : std::runtime_error(what), iterate_(std::move(iterate)) {}
  const Vector& iterate() const { return iterate_; }

 private:
  Vector iterate_;
};

struct TracePoint {
  double f_true;
  double eps;
};

struct LocalResult {
  Vector u;
  /// True (unsmoothed) objective at the end of each smoothing round.
  std::vector<double> f_history;
  std::vector<double> eps_history;
  std::vector<TracePoint> trace;
  double f_final = 0.0;
  double grad_norm = 0.0;
  int inner_iterations = 0;
  /// Largest 2-norm over all iterates, including u0.
  double max_iterate_norm = 0.0;
  bool grad_converged = false;
};

/// Minimizes the smoothed objective at fixed t = opts.params.t from u0 by
/// diagonally scaled gradient descent with Armijo backtracking; eps shrinks
/// by eps_factor each round down to eps_min. Throws DivergedError.
LocalResult minimize_local(const Instance& inst, const SemiSymmetricTensor<double>& sym,
                           const Vector& u0, const SolveOptions& opts);

/// Symmetrizes inst.A and calls the overload above.
LocalResult minimize_local(const Instance& inst, const Vector& u0, const SolveOptions& opts);

struct PolishResult {
  Vector u;
  NewtonStatus status = NewtonStatus::kNotConverged;
  double residual = 0.0;
  int iterations = 0;
};

/// Newton on (A u^{m-1} + q)_S = 0 with u = 0 off S. On anything but
/// kConverged the input is returned unchanged. kNegativity when the root has
/// a negative entry or some off-support w_j < -tol.
PolishResult polish_on_support(const Instance& inst, const SemiSymmetricTensor<double>& sym,
                               const Vector& u, const std::vector<int>& support,
                               double tol = 1e-12);

struct StartSummary {
  Vector u_initial;
  Vector u_final;
  double f0 = 0.0;
  double f_final = 0.0;
  double L = 0.0;
  int card = 0;
  bool converged = false;
  std::string polish_status;
};

struct SolveReport {
  Vector u_final;
  ResidualReport residuals;
  std::vector<int> support;
  double L_used = 0.0;
  /// The bound without the sqrt(f0) factor, reported alongside.
  double L_statement = 0.0;
  double f0 = 0.0;
  double mu = 0.0;
  double t_final = 0.0;
  double f_final = 0.0;
  /// f0 / (t L^p), the bound on the number of nonzeros.
  double card_bound = 0.0;
  double tol_zero = 1e-9;
  std::vector<double> f_history;
  std::vector<double> t_history;
  std::vector<double> lp_history;
  bool converged = false;
  std::string polish_status;
  std::vector<std::string> discrepancies;
  /// Index of the winning start.
  int best_start = 0;
  std::vector<StartSummary> starts;
  long inner_iterations = 0;
};

/// Initial point of start s: max(q~, 0.1 e) plus a seeded positive
/// perturbation in [0, 0.1).
Vector initial_point(const Instance& inst, std::uint64_t seed, int start);

/// Continuation over the schedule with warm starts, L-thresholding and
/// optional Newton polish on the detected support; best start by final
/// objective among converged starts (all starts when none converged), ties by
/// cardinality then lexicographic u.
SolveReport solve_sparse_tcp(const Instance& inst, const SolveOptions& opts = {});

}  // namespace sparse_tcp
