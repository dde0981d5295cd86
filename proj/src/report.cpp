#include "sparse_tcp/report.hpp"

#include <charconv>
#include <stdexcept>

namespace sparse_tcp {

using nlohmann::json;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const ResidualReport& r) {
  return json{{"feas_u", r.feas_u}, {"feas_w", r.feas_w}, {"comp", r.comp},
              {"fb_norm", r.fb_norm}, {"support", r.support}, {"tol_zero", r.tol_zero}};
}

json to_json(const SolveOptions& o) {
  json j{{"p", o.params.p},
         {"t", o.params.t},
         {"t0", o.schedule.t0},
         {"factor", o.schedule.factor},
         {"steps", o.schedule.steps},
         {"eps0", o.eps0},
         {"eps_factor", o.eps_factor},
         {"eps_min", o.eps_min},
         {"max_outer", o.max_outer},
         {"max_inner", o.max_inner},
         {"armijo_c", o.armijo_c},
         {"armijo_shrink", o.armijo_shrink},
         {"grad_tol", o.grad_tol},
         {"residual_tol", o.residual_tol},
         {"starts", o.starts},
         {"seed", o.seed},
         {"polish", o.polish},
         {"rho", o.fb_config.rho},
         {"xi", o.fb_config.xi},
         {"lower_bound_form",
          o.lower_bound_form == LowerBoundForm::kWithObjective ? "with_objective" : "statement"}};
  j["mu"] = o.mu ? json(*o.mu) : json(nullptr);
  return j;
}

json to_json(const OracleOptions& o) {
  return json{{"max_card", o.max_card},     {"newton_starts", o.newton_starts},
              {"tol", o.tol},               {"seed", o.seed},
              {"exhaustive", o.exhaustive}, {"dedupe_tol", o.dedupe_tol},
              {"max_newton_solves", o.max_newton_solves}, {"lp_exponents", o.lp_exponents}};
}

json to_json(const SolveReport& r) {
  json starts = json::array();
  for (const StartSummary& s : r.starts) {
    starts.push_back({{"u_initial", to_json(s.u_initial)},
                      {"u_final", to_json(s.u_final)},
                      {"f0", s.f0},
                      {"f_final", s.f_final},
                      {"L", s.L},
                      {"card", s.card},
                      {"converged", s.converged},
                      {"polish", s.polish_status}});
  }
  return json{{"u_final", to_json(r.u_final)},
              {"support", r.support},
              {"card", r.support.size()},
              {"residuals", to_json(r.residuals)},
              {"L_used", r.L_used},
              {"L_statement", r.L_statement},
              {"f0", r.f0},
              {"mu", r.mu},
              {"t_final", r.t_final},
              {"f_final", r.f_final},
              {"card_bound", r.card_bound},
              {"tol_zero", r.tol_zero},
              {"f_history", r.f_history},
              {"t_history", r.t_history},
              {"lp_history", r.lp_history},
              {"converged", r.converged},
              {"polish", r.polish_status},
              {"discrepancies", r.discrepancies},
              {"best_start", r.best_start},
              {"starts", starts},
              {"inner_iterations", r.inner_iterations}};
}

json to_json(const OracleResult& r) {
  json sols = json::array();
  for (const OracleSolution& s : r.solutions) {
    sols.push_back({{"u", to_json(s.u)}, {"support", s.support}, {"residuals", to_json(s.residuals)}});
  }
  json minimal = json::array();
  for (const auto& [p, u] : r.minimal_lp) {
    minimal.push_back({{"p", p}, {"u", to_json(u)}, {"value", lp_norm_p(u, p)}});
  }
  return json{{"solutions", sols},
              {"min_card", r.min_card ? json(*r.min_card) : json(nullptr)},
              {"sparse_solution", r.sparse_solution ? to_json(*r.sparse_solution) : json(nullptr)},
              {"minimal_lp", minimal},
              {"exhaustive", r.exhaustive},
              {"budget_exhausted", r.budget_exhausted},
              {"supports_examined", r.supports_examined},
              {"newton_solves", r.newton_solves}};
}

json to_json(const LeastElementResult& r) {
  json j{{"u", to_json(r.u)},
         {"support", r.support},
         {"pass", r.verification.pass},
         {"residuals", to_json(r.verification.report)}};
  j["oracle_agrees"] = r.oracle_agrees ? json(*r.oracle_agrees) : json(nullptr);
  return j;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field, 0, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ParseError(field + "[" + std::to_string(k) + "]", 0, "expected a number");
    v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  }
  return v;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("override " + key + ": not a number: '" + value + "'");
  }
  return out;
}

long parse_long(const std::string& key, const std::string& value) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("override " + key + ": not an integer: '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("override " + key + ": not a boolean: '" + value + "'");
}

}  // namespace

bool apply_override(const std::string& key, const std::string& value, SolveOptions& s,
                    OracleOptions& o) {
  const auto d = [&] { return parse_double(key, value); };
  const auto i = [&] { return static_cast<int>(parse_long(key, value)); };
  if (key == "t") s.params.t = d();
  else if (key == "p") s.params.p = d();
  else if (key == "t0") s.schedule.t0 = d();
  else if (key == "factor") s.schedule.factor = d();
  else if (key == "steps") s.schedule.steps = i();
  else if (key == "eps0") s.eps0 = d();
  else if (key == "eps_factor") s.eps_factor = d();
  else if (key == "eps_min") s.eps_min = d();
  else if (key == "max_outer") s.max_outer = i();
  else if (key == "max_inner") s.max_inner = i();
  else if (key == "armijo_c") s.armijo_c = d();
  else if (key == "armijo_shrink") s.armijo_shrink = d();
  else if (key == "grad_tol") s.grad_tol = d();
  else if (key == "residual_tol") s.residual_tol = d();
  else if (key == "starts") s.starts = i();
  else if (key == "seed") {
    s.seed = static_cast<std::uint64_t>(parse_long(key, value));
    o.seed = s.seed;
  } else if (key == "polish") s.polish = parse_bool(key, value);
  else if (key == "rho") s.fb_config = FbGradConfig(d(), s.fb_config.xi);
  else if (key == "xi") s.fb_config = FbGradConfig(s.fb_config.rho, d());
  else if (key == "mu") s.mu = d();
  else if (key == "lower_bound_form") {
    if (value == "with_objective") s.lower_bound_form = LowerBoundForm::kWithObjective;
    else if (value == "statement") s.lower_bound_form = LowerBoundForm::kStatement;
    else throw std::invalid_argument("override lower_bound_form: expected with_objective|statement");
  } else if (key == "max_card") o.max_card = i();
  else if (key == "newton_starts") o.newton_starts = i();
  else if (key == "tol") o.tol = d();
  else if (key == "exhaustive") o.exhaustive = parse_bool(key, value);
  else if (key == "max_newton_solves") o.max_newton_solves = parse_long(key, value);
  else return false;
  return true;
}

}  // namespace sparse_tcp
