#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sparse_tcp/tensor.hpp"

namespace sparse_tcp {

using Tensor = DenseTensor<double>;
using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

enum class InstanceSource { kGenerated, kFile, kPaperExample };

std::string_view to_string(InstanceSource source);

/// A TCP(q, A): find u >= 0 with w = A u^{m-1} + q >= 0 and u^T w = 0.
struct Instance {
  Tensor A;
  Vector q;
  std::string label;
  InstanceSource source = InstanceSource::kGenerated;
  /// Ground-truth sparse solution for planted instances.
  std::optional<Vector> planted;

  Instance() = default;
  Instance(Tensor A_in, Vector q_in, std::string label_in = {},
           InstanceSource source_in = InstanceSource::kGenerated);

  int n() const { return A.dim(); }
  int m() const { return A.order(); }
};

enum class InstanceKind { kDiagonal, kZFeasible, kRandom, kPaperExample };

/// Throws std::invalid_argument on an unknown name.
InstanceKind parse_instance_kind(std::string_view name);
std::string_view to_string(InstanceKind kind);

struct GenOptions {
  /// Support size of the planted solution for kZFeasible; 0 picks
  /// 1 + seed % 2 (capped at n).
  int plant_card = 0;
};

/// Deterministic test-instance factory.
///
/// kDiagonal: the identity tensor with q >= 0 drawn uniformly from [0, 1).
/// kZFeasible: a semi-symmetric Z-tensor with positive, row-dominant diagonal
///   and q = -A v^{m-1} + s for a planted v >= 0; s >= 0 vanishes on supp(v).
///   Every feasible point is positive on supp(v), so no support smaller than
///   supp(v) carries a solution.
/// kRandom: entries and q uniform on [-1, 1).
/// kPaperExample: the fixed order-3 dimension-3 example with q = (-1, 0, 1);
///   n, m and seed are ignored.
Instance gen_instance(InstanceKind kind, int n, int m, std::uint64_t seed,
                      const GenOptions& options = {});

/// Malformed instance file. line() is 0 when the error is not positional.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& field, int line, const std::string& detail);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

/// std::mt19937_64 with a fixed uniform mapping, so streams are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, bound).
  int below(int bound) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(bound)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sparse_tcp
