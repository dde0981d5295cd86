#include <cmath>
#include <cstdio>
#include <string>

#include "commands.hpp"
#include "sparse_tcp/oracle.hpp"
#include "sparse_tcp/report.hpp"
#include "sparse_tcp/solve.hpp"

namespace sparse_tcp::cli {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Vector family_point(double a) {
  Vector x(3);
  x << a + std::sqrt(2.0 * a * a + 1.0), 0.0, a;
  return x;
}

json reading(const std::string& name, const Instance& inst, const Vector& candidate) {
  const VerifyResult cand = verify_solution(inst, candidate, 1e-8);

  OracleOptions oopts;
  oopts.exhaustive = true;
  const OracleResult oracle = brute_force_sparse(inst, oopts);

  bool oracle_has_candidate = false;
  for (const OracleSolution& s : oracle.solutions) {
    if ((s.u - candidate).lpNorm<Eigen::Infinity>() < 1e-6) oracle_has_candidate = true;
  }

  const SolveReport solved = solve_sparse_tcp(inst);
  json discrepancies = solved.discrepancies;
  if (!oracle.min_card) {
    discrepancies.push_back("oracle found no solution; solver converged = " +
                            std::string(solved.converged ? "true" : "false"));
  } else if (static_cast<int>(solved.support.size()) != *oracle.min_card) {
    discrepancies.push_back("solver card " + std::to_string(solved.support.size()) +
                            " differs from oracle min_card " + std::to_string(*oracle.min_card));
  }

  json j{{"reading", name},
         {"m", inst.m()},
         {"n", inst.n()},
         {"q", to_json(inst.q)},
         {"is_z_tensor", is_z_tensor(inst.A)},
         {"tensor_norm", tensor_norm(inst.A)},
         {"candidate", to_json(candidate)},
         {"candidate_residuals", to_json(cand.report)},
         {"candidate_pass", cand.pass},
         {"oracle", to_json(oracle)},
         {"oracle_lists_candidate", oracle_has_candidate},
         {"solver",
          {{"u_final", to_json(solved.u_final)},
           {"card", solved.support.size()},
           {"converged", solved.converged},
           {"discrepancies", discrepancies}}}};
  if (oracle.sparse_solution && oracle.sparse_solution->lpNorm<Eigen::Infinity>() > 0.0) {
    j["t_upper"] = t_upper_for_nonzero(inst.q, *oracle.sparse_solution, 0.5);
  } else {
    j["t_upper"] = nullptr;
  }
  return j;
}

}  // namespace

Instance paper_example_declared() {
  Tensor A(3, 2);
  A.set({0, 0, 0}, 1.0);
  A.set({1, 1, 1}, 1.5);
  Vector q(2);
  q << -1.0, 0.0;
  return Instance(A, q, "paper_example_declared", InstanceSource::kPaperExample);
}

json example_report() {
  const Instance encoded = gen_instance(InstanceKind::kPaperExample, 3, 3, 0);

  json family = json::array();
  double max_identity = 0.0;
  double max_c3_dev = 0.0;
  for (double a : kExampleFamily) {
    const Vector x = family_point(a);
    const Vector w = tcp_map(encoded.A, encoded.q, x);
    const double identity = std::abs(x[0] * x[0] - 2.0 * a * x[0] - a * a - 1.0);
    const VerifyResult v = verify_solution(encoded, x, 1e-8);
    max_identity = std::max(max_identity, identity);
    max_c3_dev = std::max(max_c3_dev, std::abs(w[2] + 1.0));
    family.push_back({{"a", a},
                      {"x", to_json(x)},
                      {"identity_residual", identity},
                      {"w", to_json(w)},
                      {"u_times_w", to_json(x.cwiseProduct(w))},
                      {"residuals", to_json(v.report)},
                      {"pass", v.pass}});
  }

  Vector cand3(3);
  cand3 << 1.0, 0.0, 0.0;
  Vector cand2(2);
  cand2 << 1.0, 0.0;
  json readings = json::array({reading("encoded", encoded, cand3),
                               reading("declared", paper_example_declared(), cand2)});

  json notes = json::array();
  notes.push_back(
      "dimension: the tensor is labelled T_{3,2} (order 3, dimension 2) but its listed entries "
      "use index 3 (a_333, a_313, ...); the encoded reading uses m=3, n=3, the declared reading "
      "keeps the entries with indices in {1,2} (a_111=1, a_222=1.5) and q=(-1,0)");
  notes.push_back("component 1: x_1^2 - 2a x_1 - a^2 - 1 has max |residual| " + fmt(max_identity) +
                  " over the sampled family");
  if (max_c3_dev < 1e-12) {
    notes.push_back(
        "component 3: under the encoded reading (A x^2)_3 + q_3 = -1 for every sampled a, so "
        "x(a) violates feasibility and is not in SOL(q,A)");
  } else {
    notes.push_back("component 3: (A x^2)_3 + q_3 deviates from -1 by up to " + fmt(max_c3_dev));
  }
  for (const json& r : readings) {
    const std::string name = r["reading"];
    std::string line = name + " reading: candidate " + r["candidate"].dump() +
                       (r["candidate_pass"].get<bool>() ? " verifies" : " fails verification") +
                       " (feas_w " + fmt(r["candidate_residuals"]["feas_w"].get<double>()) +
                       "); oracle lists " + std::to_string(r["oracle"]["solutions"].size()) +
                       " solution(s)";
    if (!r["oracle"]["min_card"].is_null()) {
      line += ", min_card " + std::to_string(r["oracle"]["min_card"].get<int>());
    }
    notes.push_back(line);
  }

  return json{{"schema", kReportSchema},
              {"command", "example"},
              {"family", family},
              {"identity_max_residual", max_identity},
              {"readings", readings},
              {"notes", notes}};
}

void write_example_csv(const json& report, std::ostream& out) {
  out << "a,x1,x2,x3,identity_residual,w1,w2,w3,feas_w,comp,pass\n";
  for (const json& row : report["family"]) {
    out << row["a"].dump();
    for (const json& v : row["x"]) out << ',' << v.dump();
    out << ',' << row["identity_residual"].dump();
    for (const json& v : row["w"]) out << ',' << v.dump();
    out << ',' << row["residuals"]["feas_w"].dump() << ',' << row["residuals"]["comp"].dump() << ','
        << (row["pass"].get<bool>() ? 1 : 0) << '\n';
  }
}

void write_example_table(const json& report, std::ostream& out) {
  out << "family x(a) = (a + sqrt(2a^2+1), 0, a), encoded reading\n";
  out << "  a       identity    w1          w3          pass\n";
  for (const json& row : report["family"]) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-7.3g %-11.3g %-11.3g %-11.3g %s\n", row["a"].get<double>(),
                  row["identity_residual"].get<double>(), row["w"][0].get<double>(),
                  row["w"][2].get<double>(), row["pass"].get<bool>() ? "yes" : "no");
    out << buf;
  }
  out << "\nreading    n  candidate      verifies  oracle min_card  solver card\n";
  for (const json& r : report["readings"]) {
    const json& mc = r["oracle"]["min_card"];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %-2d %-14s %-9s %-16s %zu\n",
                  r["reading"].get<std::string>().c_str(), r["n"].get<int>(),
                  r["candidate"].dump().c_str(), r["candidate_pass"].get<bool>() ? "yes" : "no",
                  mc.is_null() ? "none" : std::to_string(mc.get<int>()).c_str(),
                  r["solver"]["card"].get<std::size_t>());
    out << buf;
  }
  out << "\nnotes:\n";
  for (const json& n : report["notes"]) out << "  - " << n.get<std::string>() << '\n';
}

}  // namespace sparse_tcp::cli
