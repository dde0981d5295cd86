#include "sparse_tcp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <stdexcept>

namespace sparse_tcp {
namespace {

constexpr int kMaxOracleDim = 8;

Vector scatter(int n, const std::vector<int>& support, const Vector& x) {
  Vector u = Vector::Zero(n);
  for (std::size_t k = 0; k < support.size(); ++k) u[support[k]] = x[static_cast<Eigen::Index>(k)];
  return u;
}

Vector gather(const Vector& v, const std::vector<int>& support) {
  Vector x(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) x[static_cast<Eigen::Index>(k)] = v[support[k]];
  return x;
}

// Advances `idx` to the next k-combination of {0..n-1} in lexicographic
// order. Returns false after the last one.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// Magnitude at which a lone diagonal term balances |q_i|.
double natural_scale(const Instance& inst, int i) {
  const double diag = std::abs(diagonal_entry(inst.A, i));
  const double qi = std::abs(inst.q[i]);
  if (diag < 1e-12 || qi < 1e-12) return 1.0;
  return std::max(0.1, std::pow(qi / diag, 1.0 / (inst.m() - 1)));
}

}  // namespace

VerifyResult verify_solution(const Instance& inst, const Vector& u, double tol, double tol_zero) {
  VerifyResult v;
  v.report = compute_residuals(inst, u, tol_zero);
  v.pass = v.report.feas_u <= tol && v.report.feas_w <= tol && v.report.comp <= tol;
  return v;
}

const char* to_string(NewtonStatus status) {
  switch (status) {
    case NewtonStatus::kConverged: return "converged";
    case NewtonStatus::kSingular: return "singular";
    case NewtonStatus::kNotConverged: return "not_converged";
    case NewtonStatus::kNegativity: return "negativity";
  }
  return "not_converged";
}

ReducedNewtonResult reduced_newton(const SemiSymmetricTensor<double>& sym, const Vector& q,
                                   const std::vector<int>& support, const Vector& x0, double tol,
                                   int max_iters) {
  const Tensor& A = sym.tensor();
  const int n = A.dim();
  const auto k = static_cast<Eigen::Index>(support.size());
  if (x0.size() != k) throw std::invalid_argument("dim: x0 length != support size");

  ReducedNewtonResult res;
  const double scale = std::max(1.0, q.lpNorm<Eigen::Infinity>());
  Vector x = x0;
  bool singular = false;

  auto residual_at = [&](const Vector& xs) { return gather(tcp_map(A, q, scatter(n, support, xs)), support); };
  Vector F = residual_at(x);

  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    const double fnorm = F.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(fnorm)) break;
    if (fnorm <= tol * scale) {
      res.status = NewtonStatus::kConverged;
      break;
    }
    const Vector u = scatter(n, support, x);
    const Matrix M = contract_m2(A, u);
    Matrix J(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) J(a, b) = (A.order() - 1) * M(support[a], support[b]);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(J);
    qr.setThreshold(1e-12);
    Vector d;
    if (qr.rank() < k) {
      singular = true;
      d = J.completeOrthogonalDecomposition().solve(-F);
    } else {
      singular = false;
      d = qr.solve(-F);
    }

    double alpha = 1.0;
    bool accepted = false;
    const double f2 = F.norm();
    while (alpha > 1e-10) {
      const Vector trial = x + alpha * d;
      const Vector Ft = residual_at(trial);
      if (Ft.allFinite() && Ft.norm() < (1.0 - 1e-4 * alpha) * f2) {
        x = trial;
        F = Ft;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Rounding floor: no further decrease is representable.
      if (fnorm <= 1e-10 * scale) res.status = NewtonStatus::kConverged;
      break;
    }
  }
  if (res.status != NewtonStatus::kConverged && F.allFinite() &&
      F.lpNorm<Eigen::Infinity>() <= tol * scale) {
    res.status = NewtonStatus::kConverged;
  }
  if (res.status != NewtonStatus::kConverged && singular) res.status = NewtonStatus::kSingular;
  res.u = scatter(n, support, x);
  res.residual = F.allFinite() ? F.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
  return res;
}

OracleResult brute_force_sparse(const Instance& inst, const OracleOptions& opts) {
  const int n = inst.n();
  if (n > kMaxOracleDim) {
    throw std::invalid_argument("oracle: n = " + std::to_string(n) + " exceeds the limit of 8");
  }
  const auto sym = SemiSymmetricTensor<double>::symmetrize(inst.A);
  const int max_card = opts.max_card < 0 ? n : std::min(opts.max_card, n);
  // Relative floor on support entries. Newton creeping toward a multiple root
  // on the boundary stalls at entries of order sqrt(tol); such points belong
  // to a smaller support, enumerated earlier.
  constexpr double kSupportTol = 1e-5;

  OracleResult result;
  bool stopped_early = false;
  long support_index = 0;

  for (int c = 0; c <= max_card && !result.budget_exhausted; ++c) {
    bool found_at_c = false;
    std::vector<int> support(c);
    std::iota(support.begin(), support.end(), 0);
    do {
      ++result.supports_examined;
      ++support_index;
      if (c == 0) {
        const Vector u = Vector::Zero(n);
        const VerifyResult v = verify_solution(inst, u, opts.tol);
        if (v.pass) {
          result.solutions.push_back({u, {}, v.report});
          found_at_c = true;
        }
        continue;
      }
      Rng rng(opts.seed * 0x100000001B3ULL + static_cast<std::uint64_t>(support_index));
      std::vector<Vector> found;
      for (int s = 0; s < opts.newton_starts; ++s) {
        if (opts.max_newton_solves > 0 && result.newton_solves >= opts.max_newton_solves) {
          result.budget_exhausted = true;
          break;
        }
        Vector x0(c);
        for (int k = 0; k < c; ++k) x0[k] = rng.uniform(0.05, 2.0) * natural_scale(inst, support[k]);
        ++result.newton_solves;
        const ReducedNewtonResult nr = reduced_newton(sym, inst.q, support, x0);
        if (nr.status != NewtonStatus::kConverged) continue;
        const Vector x = gather(nr.u, support);
        if (x.minCoeff() <= kSupportTol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) continue;
        const VerifyResult v = verify_solution(inst, nr.u, opts.tol);
        if (!v.pass) continue;
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Vector& f) {
          return (f - nr.u).lpNorm<Eigen::Infinity>() <= opts.dedupe_tol;
        });
        if (duplicate) continue;
        found.push_back(nr.u);
      }
      std::sort(found.begin(), found.end(), lex_less);
      for (const Vector& u : found) {
        result.solutions.push_back({u, support, compute_residuals(inst, u)});
        found_at_c = true;
      }
    } while (!result.budget_exhausted && next_combination(support, n));

    if (found_at_c && !opts.exhaustive && c < max_card) {
      stopped_early = true;
      break;
    }
  }
  result.exhaustive = !stopped_early && !result.budget_exhausted;

  for (const OracleSolution& s : result.solutions) {
    const int cs = static_cast<int>(s.support.size());
    if (!result.min_card || cs < *result.min_card) {
      result.min_card = cs;
      result.sparse_solution = s.u;
    }
  }
  if (!result.solutions.empty()) {
    for (double p : opts.lp_exponents) result.minimal_lp[p] = minimal_lp_select(result, p).u;
  }
  return result;
}

MinimalLpSelection minimal_lp_select(const OracleResult& result, double p) {
  if (result.solutions.empty()) throw std::invalid_argument("minimal_lp_select: no solutions");
  MinimalLpSelection best;
  bool have = false;
  for (const OracleSolution& s : result.solutions) {
    const double value = lp_norm_p(s.u, p);
    if (!have || value < best.value || (value == best.value && lex_less(s.u, best.u))) {
      best.u = s.u;
      best.value = value;
      have = true;
    }
  }
  best.approximate = !result.exhaustive;
  return best;
}

FeasibleSamples sample_feasible(const Instance& inst, int count, std::uint64_t seed) {
  const int n = inst.n();
  const int m = inst.m();
  FeasibleSamples out;
  if (count <= 0) return out;

  auto feasible = [&](const Vector& u) {
    return u.minCoeff() >= 0.0 && tcp_map(inst.A, inst.q, u).minCoeff() >= 0.0;
  };

  const Vector zero = Vector::Zero(n);
  if (feasible(zero)) out.points.push_back(zero);

  double radius = 1.0;
  for (int i = 0; i < n; ++i) radius = std::max(radius, 2.0 * natural_scale(inst, i));

  Rng rng(seed);
  const long max_attempts = 50L * count;
  constexpr int kMaxLifts = 80;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.points.size()) < count;
       ++attempt) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, radius);
    // Mix fine and coarse lifts so some samples land near the boundary.
    double step = radius * (rng.uniform() < 0.5 ? 1e-3 : 1e-1);
    for (int lift = 0; lift < kMaxLifts; ++lift) {
      const Vector w = tcp_map(inst.A, inst.q, u);
      if (w.minCoeff() >= 0.0) {
        out.points.push_back(u);
        break;
      }
      for (int i = 0; i < n; ++i) {
        if (w[i] < 0.0) u[i] += step;
      }
      step *= 2.0;
      if (!u.allFinite()) break;
    }
  }
  (void)m;
  out.none_found = out.points.empty();
  return out;
}

namespace {

// Coefficients c_0..c_{m-1} of x -> (A u(x)^{m-1} + q)_i where u(x) agrees
// with u except u_i = x, by interpolation at x = 0..m-1.
std::vector<double> row_polynomial(const Instance& inst, Vector u, int i) {
  const int d = inst.m() - 1;
  Matrix V(d + 1, d + 1);
  Vector g(d + 1);
  for (int k = 0; k <= d; ++k) {
    u[i] = static_cast<double>(k);
    g[k] = tcp_map(inst.A, inst.q, u)[i];
    for (int j = 0; j <= d; ++j) V(k, j) = std::pow(static_cast<double>(k), j);
  }
  const Vector c = V.fullPivLu().solve(g);
  return std::vector<double>(c.data(), c.data() + c.size());
}

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

// Sorted real roots of the polynomial inside (a, b), isolated through the
// critical points and refined by bisection.
std::vector<double> roots_in(std::vector<double> c, double a, double b) {
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  while (c.size() > 1 && std::abs(c.back()) <= 1e-14 * scale) c.pop_back();
  if (c.size() <= 1) return {};
  if (c.size() == 2) {
    const double x = -c[0] / c[1];
    return (x > a && x < b) ? std::vector<double>{x} : std::vector<double>{};
  }
  std::vector<double> dc(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) dc[k - 1] = static_cast<double>(k) * c[k];
  std::vector<double> pts{a};
  for (double x : roots_in(dc, a, b)) pts.push_back(x);
  pts.push_back(b);
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double lo = pts[k], hi = pts[k + 1];
    double glo = horner(c, lo);
    const double ghi = horner(c, hi);
    if (glo == 0.0 && lo > a) {
      out.push_back(lo);
      continue;
    }
    if ((glo < 0.0) == (ghi < 0.0)) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-17 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double gm = horner(c, mid);
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    out.push_back(hi);
  }
  return out;
}

// Smallest x >= lo with c(x) >= 0; nullopt when there is none.
std::optional<double> first_nonnegative(const std::vector<double>& c, double lo) {
  if (horner(c, lo) >= 0.0) return lo;
  double lead = 0.0, rest = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    if (lead == 0.0 && c[k] != 0.0) {
      lead = std::abs(c[k]);
      continue;
    }
    if (lead != 0.0) rest = std::max(rest, std::abs(c[k]));
  }
  if (lead == 0.0) return std::nullopt;
  // Cauchy's bound: every real root lies below 1 + max |c_k / c_lead|.
  const double hi = std::max(lo, 1.0 + rest / lead) + 1.0;
  for (double x : roots_in(c, lo, hi)) {
    if (horner(c, x) >= 0.0) return x;
  }
  return horner(c, hi) >= 0.0 ? std::optional<double>(hi) : std::nullopt;
}

}  // namespace

LeastElementResult least_element(const Instance& inst, const LeastElementOptions& opts) {
  if (!is_z_tensor(inst.A)) throw std::invalid_argument("least_element: not a Z-tensor");
  const int n = inst.n();

  // Gauss-Seidel from below: each coordinate moves to the smallest nonnegative
  // value making its own row nonnegative. Rows are nonincreasing in the other
  // coordinates, so every iterate stays below each feasible point and the
  // sweep increases monotonically to the least element.
  Vector u = Vector::Zero(n);
  bool settled = false;
  for (int sweep = 0; sweep < opts.max_sweeps && !settled; ++sweep) {
    double moved = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::optional<double> x = first_nonnegative(row_polynomial(inst, u, i), u[i]);
      if (!x || !std::isfinite(*x)) {
        throw std::runtime_error("least_element: feasibility not established (row " +
                                 std::to_string(i) + " cannot be made nonnegative)");
      }
      moved = std::max(moved, *x - u[i]);
      u[i] = *x;
    }
    if (u.lpNorm<Eigen::Infinity>() > opts.divergence_bound) {
      throw std::runtime_error("least_element: feasibility not established (sweep diverged)");
    }
    settled = moved <= opts.sweep_tol * std::max(1.0, u.lpNorm<Eigen::Infinity>());
  }

  LeastElementResult out;
  out.sweeps_settled = settled;
  std::vector<int> support;
  for (int i = 0; i < n; ++i) {
    if (u[i] > 0.0) support.push_back(i);
  }
  // Entries outside the support are exactly zero; Newton removes the residual
  // lag of the linearly convergent sweep on the support.
  if (!support.empty()) {
    const auto sym = SemiSymmetricTensor<double>::symmetrize(inst.A);
    const ReducedNewtonResult nr = reduced_newton(sym, inst.q, support, gather(u, support));
    if (nr.status == NewtonStatus::kConverged && gather(nr.u, support).minCoeff() > 0.0) u = nr.u;
  }
  out.u = u;
  out.support = support;
  out.verification = verify_solution(inst, out.u, opts.tol);

  if (opts.cross_check) {
    OracleResult oracle = brute_force_sparse(inst, opts.oracle);
    bool agrees = false;
    if (oracle.sparse_solution) {
      for (const OracleSolution& s : oracle.solutions) {
        if (static_cast<int>(s.support.size()) == *oracle.min_card && s.support == support &&
            (s.u - out.u).lpNorm<Eigen::Infinity>() < 1e-6) {
          agrees = true;
        }
      }
    }
    out.oracle_agrees = agrees;
    out.oracle = std::move(oracle);
  }
  return out;
}

}  // namespace sparse_tcp
