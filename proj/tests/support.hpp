#pragma once

#include <functional>
#include <random>
#include <vector>

#include "sparse_tcp/instance.hpp"

namespace sparse_tcp::testing {

/// Random draws for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Vector vector(int n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  Tensor tensor(int m, int n, double lo = -1.0, double hi = 1.0) {
    Vector e(ipow(n, m));
    for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = uniform(lo, hi);
    return Tensor(m, n, std::move(e));
  }

 private:
  std::mt19937_64 engine_;
};

/// Runs `body` on `cases` generators seeded from `seed`; the case seed is
/// passed along so failures can be replayed.
inline void for_all(int cases, std::uint64_t seed, const std::function<void(Gen&, std::uint64_t)>& body) {
  for (int c = 0; c < cases; ++c) {
    const std::uint64_t s = seed * 1000003ULL + static_cast<std::uint64_t>(c);
    Gen g(s);
    body(g, s);
  }
}

/// Entry a_{i1..im} by explicit row-major offset arithmetic.
inline double naive_entry(const Tensor& A, const std::vector<int>& idx) {
  long off = 0;
  for (int k : idx) off = off * A.dim() + k;
  return A.entries()[off];
}

/// Sums a_{i idx} u_{idx...} over every trailing multi-index of length `free`
/// after the fixed prefix.
inline double naive_sum(const Tensor& A, std::vector<int> prefix, int free, const Vector& u) {
  if (free == 0) return naive_entry(A, prefix);
  double s = 0.0;
  for (int j = 0; j < A.dim(); ++j) {
    prefix.push_back(j);
    s += u[j] * naive_sum(A, prefix, free - 1, u);
    prefix.pop_back();
  }
  return s;
}

inline Vector naive_m1(const Tensor& A, const Vector& u) {
  Vector out(A.dim());
  for (int i = 0; i < A.dim(); ++i) out[i] = naive_sum(A, {i}, A.order() - 1, u);
  return out;
}

inline Matrix naive_m2(const Tensor& A, const Vector& u) {
  Matrix out(A.dim(), A.dim());
  for (int i = 0; i < A.dim(); ++i) {
    for (int j = 0; j < A.dim(); ++j) out(i, j) = naive_sum(A, {i, j}, A.order() - 2, u);
  }
  return out;
}

inline double naive_full(const Tensor& A, const Vector& u) { return naive_sum(A, {}, A.order(), u); }

/// Relative difference normalized by max(1, |reference|).
inline double rel_diff(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

inline double rel_diff(const Eigen::MatrixXd& value, const Eigen::MatrixXd& reference) {
  return (value - reference).lpNorm<Eigen::Infinity>() /
         std::max(1.0, reference.lpNorm<Eigen::Infinity>());
}

/// Identity tensor of order m, dimension n, with q = -e.
inline Instance diagonal_minus_ones(int n, int m) {
  return Instance(Tensor::Identity(m, n), -Vector::Ones(n), "diag_minus_e");
}

}  // namespace sparse_tcp::testing
