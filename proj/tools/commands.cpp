#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparse_tcp/oracle.hpp"
#include "sparse_tcp/report.hpp"
#include "sparse_tcp/solve.hpp"

namespace sparse_tcp::cli {

using nlohmann::json;

namespace {

/// Bad input from the user; maps to kExitUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string output;
  std::string format = "json";
  bool no_timestamp = false;
  std::vector<std::string> overrides;
};

void add_output(CLI::App* cmd, Common& c, bool with_format = true) {
  cmd->add_option("-o,--output", c.output, "Write the report here instead of stdout");
  cmd->add_flag("--no-timestamp", c.no_timestamp, "Omit the generation timestamp");
  if (with_format) {
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  }
}

void add_overrides(CLI::App* cmd, Common& c) {
  cmd->add_option("--set", c.overrides, "Option override key=value (repeatable)");
}

void apply_overrides(const Common& c, SolveOptions& s, OracleOptions& o) {
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    try {
      if (!apply_override(kv.substr(0, eq), kv.substr(eq + 1), s, o)) {
        throw UsageError("--set: unknown option '" + kv.substr(0, eq) + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json envelope(const std::string& command, const Common& c) {
  json j{{"schema", kReportSchema}, {"command", command}};
  if (!c.no_timestamp) j["generated_at"] = utc_timestamp();
  return j;
}

json instance_summary(const Instance& inst) {
  return json{{"label", inst.label},
              {"source", std::string(to_string(inst.source))},
              {"n", inst.n()},
              {"m", inst.m()}};
}

Instance read_instance(const std::string& path) {
  try {
    return load_instance(path);
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
}

// Writes via `body` to the output file, or to `out` when no file is given.
void emit(const Common& c, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (c.output.empty()) {
    body(out);
    return;
  }
  std::ofstream file(c.output);
  if (!file) throw UsageError("cannot open " + c.output + " for writing");
  body(file);
  if (!file) throw UsageError("failed writing " + c.output);
}

void emit_json(const Common& c, std::ostream& out, const json& j) {
  emit(c, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

std::string csv_number(double v) { return json(v).dump(); }

Vector parse_vector_list(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--u: not a number: '" + item + "'");
    }
  }
  return Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Accepts a bare array or a report carrying u_final, u or sparse_solution.
Vector read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
  try {
    if (doc.is_array()) return vector_from_json(doc, "u");
    // Solve and oracle reports nest the vector one level down.
    for (const json* node : {&doc, doc.contains("report") ? &doc["report"] : nullptr,
                             doc.contains("result") ? &doc["result"] : nullptr}) {
      if (node == nullptr || !node->is_object()) continue;
      for (const char* key : {"u_final", "u", "sparse_solution"}) {
        if (node->contains(key) && !(*node)[key].is_null()) return vector_from_json((*node)[key], key);
      }
    }
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  }
  throw UsageError(path + ": expected an array or an object with u_final, u or sparse_solution");
}

// --- gen -------------------------------------------------------------------

struct GenArgs {
  std::string kind;
  int n = 3;
  int m = 3;
  std::uint64_t seed = 0;
  int plant_card = 0;
  Common common;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  InstanceKind kind;
  try {
    kind = parse_instance_kind(a.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.n < 1 || a.m < 2) throw UsageError("gen: need n >= 1 and m >= 2");
  if (std::pow(static_cast<double>(a.n), a.m) > 1 << 22) throw UsageError("gen: tensor too large");
  if (a.plant_card < 0 || a.plant_card > a.n) throw UsageError("gen: plant-card must be in [0, n]");
  const Instance inst = gen_instance(kind, a.n, a.m, a.seed, {a.plant_card});
  if (a.common.output.empty()) {
    out << instance_to_json(inst) << '\n';
  } else {
    try {
      save_instance(inst, a.common.output);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  }
  return kExitOk;
}

// --- solve -----------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  std::optional<double> t0, factor, p;
  std::optional<int> steps, starts;
  std::optional<std::uint64_t> seed;
  std::string lower_bound;
  Common common;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const Instance inst = read_instance(a.instance);
  SolveOptions opts;
  OracleOptions unused;
  if (a.t0) opts.schedule.t0 = *a.t0;
  if (a.factor) opts.schedule.factor = *a.factor;
  if (a.steps) opts.schedule.steps = *a.steps;
  if (a.p) opts.params.p = *a.p;
  if (a.starts) opts.starts = *a.starts;
  if (a.seed) opts.seed = *a.seed;
  if (a.lower_bound == "statement") opts.lower_bound_form = LowerBoundForm::kStatement;
  apply_overrides(a.common, opts, unused);
  try {
    opts.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const SolveReport rep = solve_sparse_tcp(inst, opts);
  if (a.common.format == "csv") {
    emit(a.common, out, [&](std::ostream& os) {
      os << "k,t,f,lp\n";
      for (std::size_t k = 0; k < rep.t_history.size(); ++k) {
        os << k << ',' << csv_number(rep.t_history[k]) << ',' << csv_number(rep.f_history[k]) << ','
           << csv_number(rep.lp_history[k]) << '\n';
      }
    });
  } else {
    json j = envelope("solve", a.common);
    j["instance"] = instance_summary(inst);
    j["options"] = to_json(opts);
    j["report"] = to_json(rep);
    emit_json(a.common, out, j);
  }
  if (!a.common.output.empty()) {
    out << "card " << rep.support.size() << ", fb_norm " << rep.residuals.fb_norm << ", converged "
        << (rep.converged ? "yes" : "no") << '\n';
  }
  if (!rep.converged) {
    err << "solve: not converged (fb_norm " << rep.residuals.fb_norm << ")\n";
    return kExitNotSolved;
  }
  return kExitOk;
}

// --- oracle ----------------------------------------------------------------

struct OracleArgs {
  std::string instance;
  std::optional<int> max_card, newton_starts;
  std::optional<std::uint64_t> seed;
  bool exhaustive = false;
  bool least = false;
  std::vector<double> p_list;
  Common common;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const Instance inst = read_instance(a.instance);
  if (inst.n() > 8) throw UsageError("oracle: n = " + std::to_string(inst.n()) + " exceeds 8");
  const bool z = is_z_tensor(inst.A);
  if (a.least && !z) throw UsageError("oracle: not a Z-tensor");

  SolveOptions unused;
  OracleOptions opts;
  if (a.max_card) opts.max_card = *a.max_card;
  if (a.newton_starts) opts.newton_starts = *a.newton_starts;
  if (a.seed) opts.seed = *a.seed;
  if (a.exhaustive) opts.exhaustive = true;
  if (!a.p_list.empty()) opts.lp_exponents = a.p_list;
  apply_overrides(a.common, unused, opts);
  for (double p : opts.lp_exponents) {
    if (!(p > 0.0 && p <= 1.0)) throw UsageError("oracle: --p values must lie in (0, 1]");
  }

  const OracleResult res = brute_force_sparse(inst, opts);
  json le = nullptr;
  if (z) {
    LeastElementOptions lopts;
    lopts.cross_check = false;
    try {
      const LeastElementResult r = least_element(inst, lopts);
      le = to_json(r);
      bool agrees = false;
      for (const OracleSolution& s : res.solutions) {
        if (res.min_card && static_cast<int>(s.support.size()) == *res.min_card &&
            (s.u - r.u).lpNorm<Eigen::Infinity>() < 1e-6) {
          agrees = true;
        }
      }
      le["oracle_agrees"] = agrees;
    } catch (const std::runtime_error& e) {
      le = json{{"error", e.what()}};
    }
  }

  if (a.common.format == "csv") {
    emit(a.common, out, [&](std::ostream& os) {
      os << "index,card";
      for (int i = 0; i < inst.n(); ++i) os << ",u" << i + 1;
      os << ",fb_norm\n";
      for (std::size_t k = 0; k < res.solutions.size(); ++k) {
        const OracleSolution& s = res.solutions[k];
        os << k << ',' << s.support.size();
        for (int i = 0; i < inst.n(); ++i) os << ',' << csv_number(s.u[i]);
        os << ',' << csv_number(s.residuals.fb_norm) << '\n';
      }
    });
  } else {
    json j = envelope("oracle", a.common);
    j["instance"] = instance_summary(inst);
    j["options"] = to_json(opts);
    j["is_z_tensor"] = z;
    j["result"] = to_json(res);
    j["least_element"] = le;
    emit_json(a.common, out, j);
  }
  if (!a.common.output.empty()) {
    out << res.solutions.size() << " solution(s), min_card "
        << (res.min_card ? std::to_string(*res.min_card) : std::string("none")) << '\n';
  }
  return kExitOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string instance;
  std::string u_list;
  std::string u_file;
  double tol = 1e-8;
  double tol_zero = 1e-9;
  Common common;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const Instance inst = read_instance(a.instance);
  if (a.u_list.empty() == a.u_file.empty()) throw UsageError("verify: give exactly one of --u, --u-file");
  const Vector u = a.u_list.empty() ? read_vector_file(a.u_file) : parse_vector_list(a.u_list);
  if (u.size() != inst.n()) {
    throw UsageError("verify: candidate has length " + std::to_string(u.size()) + ", instance n = " +
                     std::to_string(inst.n()));
  }
  if (!(a.tol > 0.0) || !(a.tol_zero >= 0.0)) throw UsageError("verify: tolerances must be positive");
  const VerifyResult v = verify_solution(inst, u, a.tol, a.tol_zero);
  if (a.common.format == "csv") {
    emit(a.common, out, [&](std::ostream& os) {
      os << "feas_u,feas_w,comp,fb_norm,card,pass\n"
         << csv_number(v.report.feas_u) << ',' << csv_number(v.report.feas_w) << ','
         << csv_number(v.report.comp) << ',' << csv_number(v.report.fb_norm) << ','
         << v.report.support.size() << ',' << (v.pass ? 1 : 0) << '\n';
    });
  } else {
    json j = envelope("verify", a.common);
    j["instance"] = instance_summary(inst);
    j["options"] = {{"tol", a.tol}, {"tol_zero", a.tol_zero}};
    j["u"] = to_json(u);
    j["residuals"] = to_json(v.report);
    j["pass"] = v.pass;
    emit_json(a.common, out, j);
  }
  return v.pass ? kExitOk : kExitNotSolved;
}

// --- example ---------------------------------------------------------------

int cmd_example(const Common& c, std::ostream& out) {
  json rep = example_report();
  if (!c.no_timestamp) rep["generated_at"] = utc_timestamp();
  if (c.format == "csv") {
    emit(c, out, [&](std::ostream& os) { write_example_csv(rep, os); });
  } else {
    emit_json(c, out, rep);
  }
  if (!c.output.empty()) write_example_table(rep, out);
  return kExitOk;
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
  int count = 50;
  std::uint64_t seed = 1000;
  int m = 3;
  int n_min = 2;
  int n_max = 5;
  Common common;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.count < 1 || a.m < 2 || a.n_min < 1 || a.n_max < a.n_min || a.n_max > 8) {
    throw UsageError("bench: need count >= 1, m >= 2, 1 <= n-min <= n-max <= 8");
  }
  SolveOptions sopts;
  OracleOptions oopts;
  apply_overrides(a.common, sopts, oopts);
  try {
    sopts.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  struct Row {
    std::string label;
    int n, m;
    std::size_t solver_card;
    std::optional<int> oracle_card;
    double fb_norm, wall;
  };
  std::vector<Row> rows;
  const int span = a.n_max - a.n_min + 1;
  for (int i = 0; i < a.count; ++i) {
    const int n = a.n_min + i % span;
    const int plant = std::min(n, 1 + (i / span) % 2);
    const Instance inst = gen_instance(InstanceKind::kZFeasible, n, a.m, a.seed + i, {plant});
    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport rep = solve_sparse_tcp(inst, sopts);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const OracleResult o = brute_force_sparse(inst, oopts);
    rows.push_back({inst.label, n, a.m, rep.support.size(), o.min_card, rep.residuals.fb_norm, wall});
  }

  if (a.common.format == "json") {
    json j = envelope("bench", a.common);
    j["options"] = {{"solve", to_json(sopts)}, {"oracle", to_json(oopts)}};
    json arr = json::array();
    for (const Row& r : rows) {
      arr.push_back({{"label", r.label},
                     {"n", r.n},
                     {"m", r.m},
                     {"solver_card", r.solver_card},
                     {"oracle_card", r.oracle_card ? json(*r.oracle_card) : json(nullptr)},
                     {"fb_norm", r.fb_norm},
                     {"wall_time", a.common.no_timestamp ? json(nullptr) : json(r.wall)}});
    }
    j["rows"] = arr;
    emit_json(a.common, out, j);
  } else {
    emit(a.common, out, [&](std::ostream& os) {
      os << "label,n,m,solver_card,oracle_card,fb_norm,wall_time\n";
      for (const Row& r : rows) {
        os << r.label << ',' << r.n << ',' << r.m << ',' << r.solver_card << ','
           << (r.oracle_card ? std::to_string(*r.oracle_card) : std::string()) << ','
           << csv_number(r.fb_norm) << ',' << (a.common.no_timestamp ? std::string() : csv_number(r.wall))
           << '\n';
      }
    });
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse solutions of tensor complementarity problems", "sparse-tcp"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate an instance file");
  g->add_option("--kind", gen.kind, "diagonal | z_feasible | random | paper_example")->required();
  g->add_option("--n", gen.n, "Dimension");
  g->add_option("--m", gen.m, "Order");
  g->add_option("--seed", gen.seed, "Seed");
  g->add_option("--plant-card", gen.plant_card, "Planted support size for z_feasible (0 = auto)");
  g->add_option("-o,--output", gen.common.output, "Instance file (stdout when absent)");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Run the continuation solver");
  s->add_option("instance", solve.instance, "Instance file")->required();
  s->add_option("--t0", solve.t0, "First regularization weight");
  s->add_option("--factor", solve.factor, "Schedule factor in (0,1)");
  s->add_option("--steps", solve.steps, "Schedule length");
  s->add_option("--p", solve.p, "Quasi-norm exponent in (0,1)");
  s->add_option("--starts", solve.starts, "Number of starts");
  s->add_option("--seed", solve.seed, "Seed");
  s->add_option("--lower-bound", solve.lower_bound, "Bound form used for thresholding")
      ->check(CLI::IsMember({"with_objective", "statement"}));
  add_output(s, solve.common);
  add_overrides(s, solve.common);

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "Exact sparse solutions by support enumeration");
  o->add_option("instance", oracle.instance, "Instance file")->required();
  o->add_option("--max-card", oracle.max_card, "Largest support enumerated");
  o->add_option("--newton-starts", oracle.newton_starts, "Newton starts per support");
  o->add_option("--seed", oracle.seed, "Seed");
  o->add_flag("--exhaustive", oracle.exhaustive, "Enumerate all supports up to max-card");
  o->add_flag("--least-element", oracle.least, "Require a Z-tensor and report its least element");
  o->add_option("--p", oracle.p_list, "Exponents for minimal l_p selection")->delimiter(',');
  add_output(o, oracle.common);
  add_overrides(o, oracle.common);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Check a candidate solution");
  v->add_option("instance", verify.instance, "Instance file")->required();
  v->add_option("--u", verify.u_list, "Candidate as comma-separated values");
  v->add_option("--u-file", verify.u_file, "Candidate as JSON array or report");
  v->add_option("--tol", verify.tol, "Verification tolerance");
  v->add_option("--tol-zero", verify.tol_zero, "Cardinality dead band");
  add_output(v, verify.common);

  Common example;
  auto* e = app.add_subcommand("example", "Reproduce the worked example");
  add_output(e, example);

  BenchArgs bench;
  bench.common.format = "csv";
  auto* b = app.add_subcommand("bench", "Solver against oracle on a seeded suite");
  b->add_option("--count", bench.count, "Number of instances");
  b->add_option("--seed", bench.seed, "Seed of the first instance");
  b->add_option("--m", bench.m, "Order");
  b->add_option("--n-min", bench.n_min, "Smallest dimension");
  b->add_option("--n-max", bench.n_max, "Largest dimension");
  add_output(b, bench.common);
  add_overrides(b, bench.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (s->parsed()) return cmd_solve(solve, out, err);
    if (o->parsed()) return cmd_oracle(oracle, out);
    if (v->parsed()) return cmd_verify(verify, out);
    if (e->parsed()) return cmd_example(example, out);
    if (b->parsed()) return cmd_bench(bench, out);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace sparse_tcp::cli
