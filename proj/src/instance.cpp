#include "sparse_tcp/instance.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace sparse_tcp {
namespace {

using nlohmann::json;

Instance make_diagonal(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = rng.uniform();
  return Instance(Tensor::Identity(m, n), std::move(q), "diagonal", InstanceSource::kGenerated);
}

Instance make_random(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  Vector entries(ipow(n, m));
  for (Eigen::Index k = 0; k < entries.size(); ++k) entries[k] = rng.uniform(-1.0, 1.0);
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = rng.uniform(-1.0, 1.0);
  return Instance(Tensor(m, n, std::move(entries)), std::move(q), "random",
                  InstanceSource::kGenerated);
}

// Off-diagonal weight of row i relative to its diagonal is kept below 1, so
// A e^{m-1} > 0 and large multiples of e are feasible.
Instance make_z_feasible(int n, int m, std::uint64_t seed, int plant_card) {
  Rng rng(seed);
  if (plant_card <= 0) plant_card = 1 + static_cast<int>(seed % 2);
  plant_card = std::min(plant_card, n);

  const Eigen::Index row_size = ipow(n, m - 1);
  Eigen::Index trailing_stride = 0;
  for (int k = 0; k < m - 1; ++k) trailing_stride = trailing_stride * n + 1;
  Vector entries = Vector::Zero(ipow(n, m));
  for (int i = 0; i < n; ++i) {
    const double diag = rng.uniform(1.0, 2.0);
    const double budget = rng.uniform(0.3, 0.9) * diag;
    const Eigen::Index diag_pos = i * row_size + i * trailing_stride;
    std::vector<double> weights(row_size, 0.0);
    for (Eigen::Index k = 0; k < row_size; ++k) {
      if (i * row_size + k == diag_pos) continue;
      if (rng.uniform() < 0.5) weights[k] = rng.uniform();
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (Eigen::Index k = 0; k < row_size; ++k) {
      if (total > 0.0) entries[i * row_size + k] = -budget * weights[k] / total;
    }
    entries[diag_pos] = diag;
  }
  Tensor A = semi_symmetrize(Tensor(m, n, std::move(entries)));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int k = n - 1; k > 0; --k) std::swap(order[k], order[rng.below(k + 1)]);
  std::vector<int> plant(order.begin(), order.begin() + plant_card);
  std::sort(plant.begin(), plant.end());

  Vector v = Vector::Zero(n);
  for (int i : plant) v[i] = rng.uniform(0.5, 1.5);

  // Shrink off-diagonal rows on the plant until (A v^{m-1})_i is a clear
  // fraction of its diagonal term, making q_i < 0 there.
  for (int i : plant) {
    for (int attempt = 0; attempt < 60; ++attempt) {
      const double r = contract_m1(A, v)[i];
      const double diag_term = diagonal_entry(A, i) * std::pow(v[i], m - 1);
      if (r >= 0.25 * diag_term) break;
      Vector e = A.entries();
      const Eigen::Index begin = i * row_size;
      for (Eigen::Index k = 0; k < row_size; ++k) {
        if (e[begin + k] < 0.0) e[begin + k] *= 0.5;
      }
      A = Tensor(m, n, std::move(e));
    }
  }

  Vector q = -contract_m1(A, v);
  for (int i = 0; i < n; ++i) {
    if (v[i] == 0.0) q[i] += rng.uniform(0.1, 1.0);
  }
  Instance inst(std::move(A), std::move(q), "z_feasible", InstanceSource::kGenerated);
  inst.planted = v;
  return inst;
}

Instance make_paper_example() {
  Tensor A(3, 3);
  // 1-based listing: a111 = 1, a222 = 1.5, a333 = 2, a131 = -3, a113 = 1,
  // a133 = -1, a311 = -2, a313 = 3, a331 = 1.
  A.set({0, 0, 0}, 1.0);
  A.set({1, 1, 1}, 1.5);
  A.set({2, 2, 2}, 2.0);
  A.set({0, 2, 0}, -3.0);
  A.set({0, 0, 2}, 1.0);
  A.set({0, 2, 2}, -1.0);
  A.set({2, 0, 0}, -2.0);
  A.set({2, 0, 2}, 3.0);
  A.set({2, 2, 0}, 1.0);
  Vector q(3);
  q << -1.0, 0.0, 1.0;
  return Instance(std::move(A), std::move(q), "paper_example", InstanceSource::kPaperExample);
}

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

// Locates the line on which a top-level key appears, for diagnostics.
int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

const json& require(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ParseError(key, 0, "missing required field");
  return doc.at(key);
}

int read_int(const json& doc, const std::string& text, const std::string& key) {
  const json& v = require(doc, key);
  if (!v.is_number_integer()) throw ParseError(key, line_of_key(text, key), "expected an integer");
  return v.get<int>();
}

Vector read_vector(const json& doc, const std::string& text, const std::string& key) {
  const json& v = require(doc, key);
  if (!v.is_array()) throw ParseError(key, line_of_key(text, key), "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) {
      throw ParseError(key + "[" + std::to_string(k) + "]", line_of_key(text, key),
                       "expected a finite number");
    }
    out[static_cast<Eigen::Index>(k)] = v[k].get<double>();
    if (!std::isfinite(out[static_cast<Eigen::Index>(k)])) {
      throw ParseError(key + "[" + std::to_string(k) + "]", line_of_key(text, key),
                       "expected a finite number");
    }
  }
  return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string_view to_string(InstanceSource source) {
  switch (source) {
    case InstanceSource::kGenerated: return "generated";
    case InstanceSource::kFile: return "file";
    case InstanceSource::kPaperExample: return "paper-example";
  }
  return "generated";
}

Instance::Instance(Tensor A_in, Vector q_in, std::string label_in, InstanceSource source_in)
    : A(std::move(A_in)), q(std::move(q_in)), label(std::move(label_in)), source(source_in) {
  if (q.size() != A.dim()) {
    throw std::invalid_argument("dim: q length " + std::to_string(q.size()) +
                                " != tensor dimension " + std::to_string(A.dim()));
  }
  if (!q.allFinite()) throw std::invalid_argument("q must be finite");
}

InstanceKind parse_instance_kind(std::string_view name) {
  if (name == "diagonal") return InstanceKind::kDiagonal;
  if (name == "z_feasible") return InstanceKind::kZFeasible;
  if (name == "random") return InstanceKind::kRandom;
  if (name == "paper_example") return InstanceKind::kPaperExample;
  throw std::invalid_argument("unknown instance kind: " + std::string(name));
}

std::string_view to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::kDiagonal: return "diagonal";
    case InstanceKind::kZFeasible: return "z_feasible";
    case InstanceKind::kRandom: return "random";
    case InstanceKind::kPaperExample: return "paper_example";
  }
  return "diagonal";
}

Instance gen_instance(InstanceKind kind, int n, int m, std::uint64_t seed,
                      const GenOptions& options) {
  if (kind == InstanceKind::kPaperExample) return make_paper_example();
  if (n < 1) throw std::invalid_argument("gen_instance: n must be >= 1");
  if (m < 2) throw std::invalid_argument("gen_instance: m must be >= 2");
  Instance inst;
  switch (kind) {
    case InstanceKind::kDiagonal: inst = make_diagonal(n, m, seed); break;
    case InstanceKind::kZFeasible: inst = make_z_feasible(n, m, seed, options.plant_card); break;
    case InstanceKind::kRandom: inst = make_random(n, m, seed); break;
    default: throw std::invalid_argument("gen_instance: unknown kind");
  }
  inst.label = std::string(to_string(kind)) + "_n" + std::to_string(n) + "_m" + std::to_string(m) +
               "_s" + std::to_string(seed);
  return inst;
}

ParseError::ParseError(const std::string& field, int line, const std::string& detail)
    : std::runtime_error("parse error" + (line > 0 ? " at line " + std::to_string(line) : "") +
                         " in field '" + field + "': " + detail),
      field_(field),
      line_(line) {}

std::string instance_to_json(const Instance& inst) {
  json doc;
  doc["m"] = inst.m();
  doc["n"] = inst.n();
  doc["entries"] = to_std(inst.A.entries());
  doc["q"] = to_std(inst.q);
  doc["label"] = inst.label;
  doc["source"] = std::string(to_string(inst.source));
  if (inst.planted) doc["planted"] = to_std(*inst.planted);
  return doc.dump(1) + "\n";
}

Instance instance_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("<document>", line_of_offset(text, e.byte), e.what());
  }
  if (!doc.is_object()) throw ParseError("<document>", 1, "expected a JSON object");

  const int m = read_int(doc, text, "m");
  const int n = read_int(doc, text, "n");
  if (m < 2) throw ParseError("m", line_of_key(text, "m"), "order must be >= 2");
  if (n < 1) throw ParseError("n", line_of_key(text, "n"), "dimension must be >= 1");
  if (n > 64 || ipow(n, m) > (Eigen::Index{1} << 26)) {
    throw ParseError("n", line_of_key(text, "n"), "tensor too large for dense storage");
  }
  Vector entries = read_vector(doc, text, "entries");
  if (entries.size() != ipow(n, m)) {
    throw ParseError("entries", line_of_key(text, "entries"),
                     "length " + std::to_string(entries.size()) + " != n^m = " +
                         std::to_string(ipow(n, m)));
  }
  Vector q = read_vector(doc, text, "q");
  if (q.size() != n) {
    throw ParseError("q", line_of_key(text, "q"),
                     "length " + std::to_string(q.size()) + " != n = " + std::to_string(n));
  }
  std::string label;
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) throw ParseError("label", line_of_key(text, "label"), "expected a string");
    label = doc["label"].get<std::string>();
  }
  InstanceSource source = InstanceSource::kFile;
  if (doc.contains("source")) {
    const json& s = doc["source"];
    if (!s.is_string()) throw ParseError("source", line_of_key(text, "source"), "expected a string");
    const std::string name = s.get<std::string>();
    if (name == "generated") source = InstanceSource::kGenerated;
    else if (name == "file") source = InstanceSource::kFile;
    else if (name == "paper-example") source = InstanceSource::kPaperExample;
    else throw ParseError("source", line_of_key(text, "source"), "unknown source '" + name + "'");
  }
  Instance inst(Tensor(m, n, std::move(entries)), std::move(q), std::move(label), source);
  if (doc.contains("planted")) {
    Vector planted = read_vector(doc, text, "planted");
    if (planted.size() != n) {
      throw ParseError("planted", line_of_key(text, "planted"), "length != n");
    }
    inst.planted = std::move(planted);
  }
  return inst;
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << instance_to_json(inst);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return instance_from_json(buffer.str());
}

}  // namespace sparse_tcp
