#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace sparse_tcp {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Vector parameter that does not take part in deducing Scalar, so Eigen
/// expressions convert.
template <typename Scalar>
using VectorArg = std::type_identity_t<VectorX<Scalar>>;

/// Integer power n^k for tensor sizes.
inline Eigen::Index ipow(Eigen::Index base, int exp) {
  Eigen::Index r = 1;
  for (int k = 0; k < exp; ++k) r *= base;
  return r;
}

/// Order-m, dimension-n real tensor stored densely in row-major order over
/// the multi-index (i1, ..., im): i1 varies slowest.
template <typename Scalar>
class DenseTensor {
 public:
  using Vector = VectorX<Scalar>;

  DenseTensor() = default;

  /// Zero tensor.
  DenseTensor(int order, int dim) : order_(order), dim_(dim) {
    check_shape(order, dim);
    entries_ = Vector::Zero(ipow(dim, order));
  }

  DenseTensor(int order, int dim, Vector entries)
      : order_(order), dim_(dim), entries_(std::move(entries)) {
    check_shape(order, dim);
    if (entries_.size() != ipow(dim, order)) {
      throw std::invalid_argument(
          "dim: tensor entries length " + std::to_string(entries_.size()) +
          " != n^m = " + std::to_string(ipow(dim, order)));
    }
    if (!entries_.allFinite()) {
      throw std::invalid_argument("tensor entries must be finite");
    }
  }

  /// The identity tensor: a_{i...i} = 1, all other entries 0.
  static DenseTensor Identity(int order, int dim) {
    DenseTensor t(order, dim);
    std::vector<int> idx(order);
    for (int i = 0; i < dim; ++i) {
      std::fill(idx.begin(), idx.end(), i);
      t.set(idx, Scalar(1));
    }
    return t;
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  Eigen::Index size() const { return entries_.size(); }
  const Vector& entries() const { return entries_; }
  const Scalar* data() const { return entries_.data(); }

  Eigen::Index linear_index(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != order_) {
      throw std::invalid_argument("dim: multi-index length != order");
    }
    Eigen::Index lin = 0;
    for (int k : idx) {
      if (k < 0 || k >= dim_) throw std::out_of_range("multi-index entry out of range");
      lin = lin * dim_ + k;
    }
    return lin;
  }

  /// Decodes a linear position into its multi-index.
  void multi_index(Eigen::Index lin, std::span<int> idx) const {
    for (int k = order_ - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(lin % dim_);
      lin /= dim_;
    }
  }

  Scalar operator()(std::span<const int> idx) const { return entries_[linear_index(idx)]; }
  Scalar operator()(std::initializer_list<int> idx) const {
    return (*this)(std::span<const int>(idx.begin(), idx.size()));
  }

  void set(std::span<const int> idx, Scalar value) {
    if (!std::isfinite(static_cast<double>(value))) {
      throw std::invalid_argument("tensor entries must be finite");
    }
    entries_[linear_index(idx)] = value;
  }
  void set(std::initializer_list<int> idx, Scalar value) {
    set(std::span<const int>(idx.begin(), idx.size()), value);
  }

  template <typename NewScalar>
  DenseTensor<NewScalar> cast() const {
    return DenseTensor<NewScalar>(order_, dim_, entries_.template cast<NewScalar>());
  }

  bool operator==(const DenseTensor& other) const {
    return order_ == other.order_ && dim_ == other.dim_ && entries_ == other.entries_;
  }

 private:
  static void check_shape(int order, int dim) {
    if (order < 2) throw std::invalid_argument("tensor order must be >= 2");
    if (dim < 1) throw std::invalid_argument("tensor dimension must be >= 1");
  }

  int order_ = 2;
  int dim_ = 1;
  Vector entries_ = Vector::Zero(1);
};

namespace internal {

template <typename Scalar>
void check_dim(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& u) {
  if (u.size() != A.dim()) {
    throw std::invalid_argument("dim: vector length " + std::to_string(u.size()) +
                                " != tensor dimension " + std::to_string(A.dim()));
  }
}

// Contracts the trailing `count` indices of A with u. The result has
// n^(m - count) entries in row-major order over the remaining indices.
template <typename Scalar>
VectorX<Scalar> contract_trailing(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& u,
                                  int count) {
  using RowMajorMatrix =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Index n = A.dim();
  VectorX<Scalar> current = A.entries();
  for (int k = 0; k < count; ++k) {
    const Eigen::Index rows = current.size() / n;
    Eigen::Map<const RowMajorMatrix> view(current.data(), rows, n);
    VectorX<Scalar> next = view * u;
    current.swap(next);
  }
  return current;
}

}  // namespace internal

/// (A u^{m-1})_i = sum a_{i i2 ... im} u_{i2} ... u_{im}.
template <typename Scalar>
VectorX<Scalar> contract_m1(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& u) {
  internal::check_dim(A, u);
  return internal::contract_trailing(A, u, A.order() - 1);
}

/// M_{ij} = sum a_{i j i3 ... im} u_{i3} ... u_{im}. For m = 2 this is A
/// itself. The Jacobian of u -> A u^{m-1} is (m - 1) M when A is
/// semi-symmetric; the (m - 1) factor is left to the caller.
template <typename Scalar>
MatrixX<Scalar> contract_m2(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& u) {
  internal::check_dim(A, u);
  const Eigen::Index n = A.dim();
  const VectorX<Scalar> flat = internal::contract_trailing(A, u, A.order() - 2);
  using RowMajorMatrix =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajorMatrix>(flat.data(), n, n);
}

/// A u^m = u^T (A u^{m-1}).
template <typename Scalar>
Scalar contract_full(const DenseTensor<Scalar>& A, const VectorArg<Scalar>& u) {
  return u.dot(contract_m1(A, u));
}

/// Averages A over all permutations of its trailing m - 1 indices.
template <typename Scalar>
DenseTensor<Scalar> semi_symmetrize(const DenseTensor<Scalar>& A) {
  const int m = A.order();
  VectorX<Scalar> out(A.size());
  std::vector<int> idx(m);
  std::vector<int> perm(m);
  for (Eigen::Index lin = 0; lin < A.size(); ++lin) {
    A.multi_index(lin, idx);
    perm = idx;
    std::sort(perm.begin() + 1, perm.end());
    Scalar sum(0);
    int count = 0;
    do {
      sum += A.entries()[A.linear_index(perm)];
      ++count;
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
    out[lin] = sum / Scalar(count);
  }
  return DenseTensor<Scalar>(m, A.dim(), std::move(out));
}

/// True when every entry equals its trailing-index permutations within tol.
template <typename Scalar>
bool is_semi_symmetric(const DenseTensor<Scalar>& A, Scalar tol = Scalar(0)) {
  const int m = A.order();
  std::vector<int> idx(m);
  for (Eigen::Index lin = 0; lin < A.size(); ++lin) {
    A.multi_index(lin, idx);
    std::vector<int> perm = idx;
    std::sort(perm.begin() + 1, perm.end());
    do {
      using std::abs;
      if (abs(A.entries()[A.linear_index(perm)] - A.entries()[lin]) > tol) return false;
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
  }
  return true;
}

/// A tensor whose trailing-index symmetry has been established, either by
/// construction through semi_symmetrize or by an explicit check.
template <typename Scalar>
class SemiSymmetricTensor {
 public:
  static SemiSymmetricTensor symmetrize(const DenseTensor<Scalar>& A) {
    return SemiSymmetricTensor(semi_symmetrize(A));
  }

  /// Throws std::invalid_argument unless A is already semi-symmetric.
  static SemiSymmetricTensor checked(DenseTensor<Scalar> A, Scalar tol = Scalar(0)) {
    if (!is_semi_symmetric(A, tol)) {
      throw std::invalid_argument(
          "tensor is not semi-symmetric; call semi_symmetrize first");
    }
    return SemiSymmetricTensor(std::move(A));
  }

  const DenseTensor<Scalar>& tensor() const { return tensor_; }
  operator const DenseTensor<Scalar>&() const { return tensor_; }
  int order() const { return tensor_.order(); }
  int dim() const { return tensor_.dim(); }

 private:
  explicit SemiSymmetricTensor(DenseTensor<Scalar> A) : tensor_(std::move(A)) {}
  DenseTensor<Scalar> tensor_;
};

/// Every entry off the diagonal (i, i, ..., i) is nonpositive.
template <typename Scalar>
bool is_z_tensor(const DenseTensor<Scalar>& A) {
  const Eigen::Index n = A.dim();
  // Linear positions of diagonal entries are multiples of 1 + n + ... + n^{m-1}.
  Eigen::Index stride = 0;
  for (int k = 0; k < A.order(); ++k) stride = stride * n + 1;
  for (Eigen::Index lin = 0; lin < A.size(); ++lin) {
    if (lin % stride == 0) continue;
    if (A.entries()[lin] > Scalar(0)) return false;
  }
  return true;
}

/// Diagonal entry a_{i...i}.
template <typename Scalar>
Scalar diagonal_entry(const DenseTensor<Scalar>& A, int i) {
  Eigen::Index stride = 0;
  for (int k = 0; k < A.order(); ++k) stride = stride * A.dim() + 1;
  return A.entries()[stride * i];
}

/// Frobenius (entrywise 2-) norm.
template <typename Scalar>
Scalar tensor_norm(const DenseTensor<Scalar>& A) {
  return A.entries().norm();
}

}  // namespace sparse_tcp
