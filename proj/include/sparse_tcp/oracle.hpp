#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "sparse_tcp/instance.hpp"
#include "sparse_tcp/merit.hpp"

namespace sparse_tcp {

struct VerifyResult {
  ResidualReport report;
  bool pass = false;
};

/// Passes iff feas_u, feas_w and comp are all <= tol.
VerifyResult verify_solution(const Instance& inst, const Vector& u, double tol,
                             double tol_zero = 1e-9);

enum class NewtonStatus { kConverged, kSingular, kNotConverged, kNegativity };

const char* to_string(NewtonStatus status);

struct ReducedNewtonResult {
  /// Full-length point with zeros off the support.
  Vector u;
  NewtonStatus status = NewtonStatus::kNotConverged;
  int iterations = 0;
  /// ||w_S||_inf at the returned point.
  double residual = 0.0;
};

/// Damped Newton on (A u^{m-1} + q)_S = 0 with u_j = 0 off S, where the
/// Jacobian is (m - 1) (A u^{m-2})_{SS}. Does not check signs.
ReducedNewtonResult reduced_newton(const SemiSymmetricTensor<double>& sym, const Vector& q,
                                   const std::vector<int>& support, const Vector& x0,
                                   double tol = 1e-13, int max_iters = 100);

struct OracleOptions {
  /// Largest support size enumerated; -1 means n.
  int max_card = -1;
  int newton_starts = 20;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Enumerate every support up to max_card instead of stopping at the first
  /// cardinality that carries a verified solution.
  bool exhaustive = false;
  /// Root deduplication radius (infinity norm).
  double dedupe_tol = 1e-7;
  /// Budget on reduced Newton solves; 0 means unlimited.
  long max_newton_solves = 0;
  /// l_p exponents for which minimal_lp is filled.
  std::vector<double> lp_exponents{0.5};
};

struct OracleSolution {
  Vector u;
  std::vector<int> support;
  ResidualReport residuals;
};

struct OracleResult {
  /// Sorted by cardinality, then lexicographically by support.
  std::vector<OracleSolution> solutions;
  std::optional<int> min_card;
  std::optional<Vector> sparse_solution;
  std::map<double, Vector> minimal_lp;
  /// Every support up to max_card was enumerated to completion.
  bool exhaustive = false;
  /// Search stopped because max_newton_solves ran out.
  bool budget_exhausted = false;
  long supports_examined = 0;
  long newton_solves = 0;
};

/// Exact sparse solutions by support enumeration in increasing cardinality.
/// Requires n <= 8.
OracleResult brute_force_sparse(const Instance& inst, const OracleOptions& opts = {});

struct MinimalLpSelection {
  Vector u;
  double value = 0.0;
  /// The solution list was not exhaustive.
  bool approximate = false;
};

/// argmin of sum |u_i|^p over result.solutions, ties broken lexicographically.
/// Throws std::invalid_argument when no solutions were found.
MinimalLpSelection minimal_lp_select(const OracleResult& result, double p);

struct FeasibleSamples {
  std::vector<Vector> points;
  /// No feasible point was found within the attempt budget.
  bool none_found = false;
};

/// Feasible points (u >= 0, A u^{m-1} + q >= -1e-10) from random nonnegative
/// draws, each lifted componentwise along its violated rows until feasible.
FeasibleSamples sample_feasible(const Instance& inst, int count, std::uint64_t seed);

struct LeastElementOptions {
  int max_sweeps = 100000;
  /// Sweeps stop once no coordinate moves by more than this (relative).
  double sweep_tol = 1e-15;
  double divergence_bound = 1e12;
  double tol = 1e-8;
  /// Also run brute_force_sparse and compare supports.
  bool cross_check = true;
  OracleOptions oracle;
};

struct LeastElementResult {
  Vector u;
  std::vector<int> support;
  VerifyResult verification;
  /// Supports agree with the oracle's minimal-cardinality solution; empty
  /// when cross_check is off.
  std::optional<bool> oracle_agrees;
  std::optional<OracleResult> oracle;
  bool sweeps_settled = false;
};

/// Least element of FEA(q, A) for a Z-tensor by monotone Gauss-Seidel sweeps
/// from 0 (each coordinate set to the smallest nonnegative root of its row),
/// then refined by Newton on the support. Throws std::invalid_argument for
/// non-Z input and std::runtime_error when FEA is found to be empty.
LeastElementResult least_element(const Instance& inst, const LeastElementOptions& opts = {});

}  // namespace sparse_tcp
