#include "sparse_tcp/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sparse_tcp {
namespace {

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Smoothed gradient together with a positive diagonal scaling: the
// Gauss-Newton diagonal of the merit plus the majorizing curvature
// t p (u_i^2 + eps^2)^{p/2 - 1} of the smoothed penalty.
struct ScaledGradient {
  Vector grad;
  Vector scale;
};

ScaledGradient scaled_gradient(const SemiSymmetricTensor<double>& sym, const Vector& q,
                               const Vector& u, const ObjectiveParams& params, double eps,
                               const FbGradConfig& cfg) {
  const Tensor& A = sym.tensor();
  const Vector w = tcp_map(A, q, u);
  const Eigen::Index n = u.size();
  Vector dv(n), dz(n), phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::hypot(u[i], w[i]);
    phi[i] = phi_fb(u[i], w[i]);
    if (r > 0.0) {
      dv[i] = u[i] / r - 1.0;
      dz[i] = w[i] / r - 1.0;
    } else {
      dv[i] = cfg.rho - 1.0;
      dz[i] = cfg.xi - 1.0;
    }
  }
  // Jacobian of Phi_FB: diag(dv) + diag(dz) (m - 1) M.
  Matrix J = double(A.order() - 1) * (dz.asDiagonal() * contract_m2(A, u));
  J.diagonal() += dv;

  ScaledGradient out;
  out.grad = J.transpose() * phi;
  out.scale = J.colwise().squaredNorm().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = u[i] * u[i] + eps * eps;
    const double weight = params.t * params.p * std::pow(s, 0.5 * params.p - 1.0);
    out.grad[i] += weight * u[i];
    out.scale[i] += weight + 1e-12;
  }
  return out;
}

}  // namespace

void SolveOptions::validate() const {
  params.validate();
  make_schedule(schedule.t0, schedule.factor, schedule.steps);
  auto in_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!(eps0 > 0.0)) throw std::invalid_argument("SolveOptions: eps0 must be > 0");
  if (!(eps_min > 0.0)) throw std::invalid_argument("SolveOptions: eps_min must be > 0");
  if (!in_unit(eps_factor)) throw std::invalid_argument("SolveOptions: eps_factor must lie in (0, 1)");
  if (!in_unit(armijo_c)) throw std::invalid_argument("SolveOptions: armijo_c must lie in (0, 1)");
  if (!in_unit(armijo_shrink)) {
    throw std::invalid_argument("SolveOptions: armijo_shrink must lie in (0, 1)");
  }
  if (!(grad_tol > 0.0) || !(residual_tol > 0.0)) {
    throw std::invalid_argument("SolveOptions: tolerances must be > 0");
  }
  if (max_outer < 1 || max_inner < 1) {
    throw std::invalid_argument("SolveOptions: max_outer and max_inner must be >= 1");
  }
  if (starts < 1) throw std::invalid_argument("SolveOptions: starts must be >= 1");
  if (mu && !(*mu > 0.0)) throw std::invalid_argument("SolveOptions: mu must be > 0");
}

double smooth_penalty(const Vector& u, const ObjectiveParams& params, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("smooth_penalty: eps must be > 0");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    sum += std::pow(u[i] * u[i] + eps * eps, 0.5 * params.p);
  }
  return params.t * sum;
}

double smooth_objective(const Instance& inst, const Vector& u, const ObjectiveParams& params,
                        double eps) {
  params.validate();
  return merit_fb(inst, u) + smooth_penalty(u, params, eps);
}

Vector smooth_grad(const SemiSymmetricTensor<double>& sym, const Vector& q, const Vector& u,
                   const ObjectiveParams& params, double eps, const FbGradConfig& cfg) {
  params.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("smooth_grad: eps must be > 0");
  Vector g = grad_merit(sym, q, u, cfg);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    g[i] += params.t * params.p * u[i] * std::pow(u[i] * u[i] + eps * eps, 0.5 * params.p - 1.0);
  }
  return g;
}

LocalResult minimize_local(const Instance& inst, const Vector& u0, const SolveOptions& opts) {
  return minimize_local(inst, SemiSymmetricTensor<double>::symmetrize(inst.A), u0, opts);
}

LocalResult minimize_local(const Instance& inst, const SemiSymmetricTensor<double>& sym,
                           const Vector& u0, const SolveOptions& opts) {
  opts.validate();
  if (u0.size() != inst.n()) throw std::invalid_argument("dim: u0 length != n");
  const ObjectiveParams& params = opts.params;

  LocalResult res;
  Vector u = u0;
  res.max_iterate_norm = u.norm();
  double eps = std::max(opts.eps0, opts.eps_min);
  double f = smooth_objective(inst, u, params, eps);
  if (!std::isfinite(f)) throw DivergedError("minimize_local: non-finite objective at u0", u);

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    bool grad_converged = false;
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      const ScaledGradient sg = scaled_gradient(sym, inst.q, u, params, eps, opts.fb_config);
      res.grad_norm = sg.grad.norm();
      if (!std::isfinite(res.grad_norm)) {
        throw DivergedError("minimize_local: non-finite gradient", u);
      }
      if (res.grad_norm <= opts.grad_tol) {
        grad_converged = true;
        break;
      }
      const Vector d = -sg.grad.cwiseQuotient(sg.scale);
      const double slope = sg.grad.dot(d);
      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-20) {
        const Vector trial = u + alpha * d;
        const double ft = smooth_objective(inst, trial, params, eps);
        if (std::isfinite(ft) && ft <= f + opts.armijo_c * alpha * slope) {
          u = trial;
          f = ft;
          accepted = true;
          break;
        }
        alpha *= opts.armijo_shrink;
      }
      if (!accepted) break;
      ++res.inner_iterations;
      res.max_iterate_norm = std::max(res.max_iterate_norm, u.norm());
      if (opts.record_trace) res.trace.push_back({objective(inst, u, params), eps});
    }
    res.grad_converged = grad_converged;
    res.f_history.push_back(objective(inst, u, params));
    res.eps_history.push_back(eps);
    if (eps <= opts.eps_min && grad_converged) break;
    eps = std::max(eps * opts.eps_factor, opts.eps_min);
    f = smooth_objective(inst, u, params, eps);
    if (!std::isfinite(f)) throw DivergedError("minimize_local: non-finite objective", u);
  }
  res.u = u;
  res.f_final = objective(inst, u, params);
  if (!std::isfinite(res.f_final)) throw DivergedError("minimize_local: non-finite objective", u);
  return res;
}

PolishResult polish_on_support(const Instance& inst, const SemiSymmetricTensor<double>& sym,
                               const Vector& u, const std::vector<int>& support, double tol) {
  if (support.empty()) throw std::invalid_argument("polish_on_support: empty support");
  Vector x0(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) x0[static_cast<Eigen::Index>(k)] = u[support[k]];

  PolishResult out;
  out.u = u;
  const ReducedNewtonResult nr = reduced_newton(sym, inst.q, support, x0, tol);
  out.iterations = nr.iterations;
  out.residual = nr.residual;
  out.status = nr.status;
  if (nr.status != NewtonStatus::kConverged) return out;

  const Vector w = tcp_map(inst.A, inst.q, nr.u);
  const double w_tol = tol * std::max(1.0, inst.q.lpNorm<Eigen::Infinity>());
  bool negative = nr.u.minCoeff() < 0.0;
  for (int j = 0; j < inst.n() && !negative; ++j) {
    const bool on_support = std::find(support.begin(), support.end(), j) != support.end();
    if (!on_support && w[j] < -w_tol) negative = true;
  }
  if (negative) {
    out.status = NewtonStatus::kNegativity;
    return out;
  }
  out.u = nr.u;
  return out;
}

Vector initial_point(const Instance& inst, std::uint64_t seed, int start) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(start) + 1);
  Vector u0 = q_tilde(inst.q).cwiseMax(0.1);
  // Later starts spread wider so that not every start lands in one basin.
  const double spread = start == 0 ? 0.1 : 0.1 * (1 << std::min(start, 4));
  for (Eigen::Index i = 0; i < u0.size(); ++i) u0[i] += rng.uniform(0.0, spread);
  return u0;
}

namespace {

struct StartRun {
  StartSummary summary;
  SolveReport report;
};

std::vector<int> support_of(const Vector& u, double tol_zero) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > tol_zero) s.push_back(static_cast<int>(i));
  }
  return s;
}

StartRun run_start(const Instance& inst, const SemiSymmetricTensor<double>& sym,
                   const SolveOptions& opts, int start) {
  StartRun run;
  SolveReport& rep = run.report;
  const int n = inst.n();
  const double p = opts.params.p;

  const Vector u0 = initial_point(inst, opts.seed, start);
  Vector u = u0;
  double max_norm = u0.norm();
  SolveOptions local = opts;
  for (int k = 0; k < opts.schedule.steps; ++k) {
    local.params.t = next_t(opts.schedule, k);
    const LocalResult lr = minimize_local(inst, sym, u, local);
    u = lr.u;
    max_norm = std::max(max_norm, lr.max_iterate_norm);
    rep.t_history.push_back(local.params.t);
    rep.f_history.push_back(lr.f_final);
    rep.lp_history.push_back(lp_norm_p(u, p));
    rep.inner_iterations += lr.inner_iterations;
  }

  const double t_final = opts.schedule.last();
  const ObjectiveParams final_params(t_final, p);
  rep.t_final = t_final;
  rep.f0 = objective(inst, u0, final_params);
  const double f_local = objective(inst, u, final_params);
  if (f_local > rep.f0) {
    rep.discrepancies.push_back("start " + std::to_string(start) + ": f(u*) = " +
                                format_double(f_local) + " exceeds f(u0) = " +
                                format_double(rep.f0) + "; bounds use f(u*)");
    rep.f0 = f_local;
  }
  rep.mu = opts.mu ? *opts.mu : compute_Bbar(n, p, std::max(1.0, max_norm));

  const BoundInputs<double> bounds{t_final, p, inst.m(), tensor_norm(sym.tensor()), rep.mu, rep.f0};
  rep.L_used = lower_bound_L(bounds, opts.lower_bound_form);
  rep.L_statement = lower_bound_L(bounds, LowerBoundForm::kStatement);
  rep.tol_zero = std::max(rep.L_used / 2.0, 1e-9);

  Vector u_out = threshold_by_L(u, rep.L_used);
  std::vector<int> support = support_of(u_out, rep.tol_zero);
  rep.polish_status = "skipped";
  if (opts.polish && !support.empty()) {
    PolishResult pr = polish_on_support(inst, sym, u_out, support);
    if (pr.status != NewtonStatus::kConverged) {
      // Retry on a coarser cut in case stray small entries survived.
      const std::vector<int> coarse =
          support_of(u_out, std::max(rep.tol_zero, 1e-4 * u_out.lpNorm<Eigen::Infinity>()));
      if (!coarse.empty() && coarse != support) {
        PolishResult retry = polish_on_support(inst, sym, u_out, coarse);
        if (retry.status == NewtonStatus::kConverged) pr = std::move(retry);
      }
    }
    rep.polish_status = to_string(pr.status);
    if (pr.status == NewtonStatus::kConverged) {
      const Vector floored = threshold_by_L(pr.u, rep.L_used);
      if (floored != pr.u) {
        rep.discrepancies.push_back("start " + std::to_string(start) +
                                    ": polished entries below L were zeroed");
      }
      u_out = floored;
    } else {
      rep.discrepancies.push_back("start " + std::to_string(start) +
                                  ": polish rejected (" + rep.polish_status + ")");
    }
  }

  rep.u_final = u_out;
  rep.residuals = compute_residuals(inst, u_out, rep.tol_zero);
  rep.support = rep.residuals.support;
  rep.converged = rep.residuals.fb_norm <= opts.residual_tol &&
                  verify_solution(inst, u_out, opts.residual_tol, rep.tol_zero).pass;
  rep.f_final = objective(inst, u_out, final_params);
  rep.card_bound = rep.f0 / (t_final * std::pow(rep.L_used, p));
  if (static_cast<double>(rep.support.size()) > rep.card_bound) {
    rep.discrepancies.push_back("start " + std::to_string(start) +
                                ": nonzero count exceeds f(u0) / (t L^p)");
  }

  StartSummary& s = run.summary;
  s.u_initial = u0;
  s.u_final = u_out;
  s.f0 = rep.f0;
  s.f_final = rep.f_final;
  s.L = rep.L_used;
  s.card = static_cast<int>(rep.support.size());
  s.converged = rep.converged;
  s.polish_status = rep.polish_status;
  return run;
}

// Strict weak order for the multi-start reduction.
bool better(const StartRun& a, const StartRun& b) {
  if (a.report.converged != b.report.converged) return a.report.converged;
  if (a.report.f_final != b.report.f_final) return a.report.f_final < b.report.f_final;
  if (a.report.support.size() != b.report.support.size()) {
    return a.report.support.size() < b.report.support.size();
  }
  return lex_less(a.report.u_final, b.report.u_final);
}

}  // namespace

SolveReport solve_sparse_tcp(const Instance& inst, const SolveOptions& opts) {
  opts.validate();
  const auto sym = SemiSymmetricTensor<double>::symmetrize(inst.A);

  std::vector<StartRun> runs;
  std::vector<std::string> notes;
  std::optional<DivergedError> last_error;
  for (int s = 0; s < opts.starts; ++s) {
    try {
      runs.push_back(run_start(inst, sym, opts, s));
    } catch (const DivergedError& e) {
      notes.push_back("start " + std::to_string(s) + " diverged: " + e.what());
      last_error = e;
    }
  }
  if (runs.empty()) throw *last_error;

  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    if (better(runs[k], runs[best])) best = k;
  }
  SolveReport report = runs[best].report;
  report.best_start = static_cast<int>(best);
  report.discrepancies.insert(report.discrepancies.begin(), notes.begin(), notes.end());
  if (report.L_statement != report.L_used) {
    report.discrepancies.push_back("lower bound: with sqrt(f0) L = " + format_double(report.L_used) +
                                   ", without L = " + format_double(report.L_statement));
  }
  long total_inner = 0;
  for (const StartRun& r : runs) {
    report.starts.push_back(r.summary);
    total_inner += r.report.inner_iterations;
  }
  report.inner_iterations = total_inner;
  return report;
}

}  // namespace sparse_tcp
