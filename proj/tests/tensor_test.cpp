#include <gtest/gtest.h>

#include <cmath>

#include "sparse_tcp/instance.hpp"
#include "sparse_tcp/merit.hpp"
#include "support.hpp"

namespace sparse_tcp {
namespace {

using testing::for_all;
using testing::Gen;

TEST(DenseTensor, RejectsWrongEntryCount) {
  EXPECT_THROW(Tensor(3, 2, Vector::Zero(7)), std::invalid_argument);
  EXPECT_NO_THROW(Tensor(3, 2, Vector::Zero(8)));
}

TEST(DenseTensor, RejectsNonFiniteEntries) {
  Vector e = Vector::Ones(4);
  e[2] = std::nan("");
  EXPECT_THROW(Tensor(2, 2, e), std::invalid_argument);
  Tensor A(2, 2);
  EXPECT_THROW(A.set({0, 1}, INFINITY), std::invalid_argument);
}

TEST(DenseTensor, RejectsBadShape) {
  EXPECT_THROW(Tensor(1, 3), std::invalid_argument);
  EXPECT_THROW(Tensor(3, 0), std::invalid_argument);
}

TEST(DenseTensor, RowMajorIndexing) {
  Tensor A(3, 2);
  A.set({1, 0, 1}, 7.0);
  EXPECT_EQ(A.entries()[1 * 4 + 0 * 2 + 1], 7.0);
  EXPECT_EQ((A({1, 0, 1})), 7.0);
  std::vector<int> idx(3);
  A.multi_index(5, idx);
  EXPECT_EQ(idx, (std::vector<int>{1, 0, 1}));
}

TEST(ContractM1, IdentityOnOnes) {
  const Vector r = contract_m1(Tensor::Identity(3, 2), Vector::Ones(2));
  EXPECT_EQ(r, Vector::Ones(2));
}

TEST(ContractM1, ZeroVectorGivesZero) {
  Gen g(3);
  const Tensor A = g.tensor(4, 3);
  EXPECT_EQ(contract_m1(A, Vector::Zero(3)), Vector::Zero(3));
}

TEST(ContractM1, DimensionMismatchThrows) {
  try {
    contract_m1(Tensor::Identity(3, 2), Vector::Ones(3));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("dim"), std::string::npos);
  }
  EXPECT_THROW(contract_m2(Tensor::Identity(3, 2), Vector::Ones(3)), std::invalid_argument);
  EXPECT_THROW(contract_full(Tensor::Identity(3, 2), Vector::Ones(1)), std::invalid_argument);
}

TEST(ContractM1, ExampleTensorFirstComponent) {
  const Instance ex = gen_instance(InstanceKind::kPaperExample, 0, 0, 0);
  Vector u(3);
  u << 1.0, 0.0, 0.0;
  const Vector r = contract_m1(ex.A, u);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 0.0);
  EXPECT_DOUBLE_EQ(r[2], -2.0);
}

TEST(ContractM1, MatchesNaiveLoopSeed42) {
  Gen g(42);
  const Tensor A = g.tensor(3, 3);
  const Vector u = g.vector(3);
  EXPECT_LT(testing::rel_diff(contract_m1(A, u), testing::naive_m1(A, u)), 1e-13);
}

TEST(ContractM2, IdentityOnOnes) {
  const Matrix M = contract_m2(Tensor::Identity(3, 2), Vector::Ones(2));
  EXPECT_EQ(M, Matrix::Identity(2, 2));
}

TEST(ContractM2, OrderTwoReturnsMatrix) {
  Gen g(5);
  const Tensor A = g.tensor(2, 3);
  const Matrix M = contract_m2(A, g.vector(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(M(i, j), (A({i, j})));
  }
}

TEST(ContractM2, SemiSymmetricIdentity) {
  for_all(30, 11, [](Gen& g, std::uint64_t seed) {
    SCOPED_TRACE(seed);
    const int n = g.integer(1, 5), m = g.integer(2, 4);
    const Tensor A = semi_symmetrize(g.tensor(m, n));
    const Vector u = g.vector(n);
    EXPECT_LT(testing::rel_diff(contract_m2(A, u) * u, contract_m1(A, u)), 1e-12);
  });
}

TEST(ContractFull, IdentityOnOnes) {
  EXPECT_DOUBLE_EQ(contract_full(Tensor::Identity(3, 2), Vector::Ones(2)), 2.0);
  EXPECT_EQ(contract_full(Tensor::Identity(3, 2), Vector::Zero(2)), 0.0);
}

TEST(ContractionProperties, Homogeneity) {
  for_all(50, 12, [](Gen& g, std::uint64_t seed) {
    SCOPED_TRACE(seed);
    const int n = g.integer(1, 5), m = g.integer(2, 4);
    const Tensor A = g.tensor(m, n);
    const Vector u = g.vector(n);
    const double alpha = g.uniform(0.0, 3.0);
    const Vector lhs = contract_m1(A, Vector(alpha * u));
    const Vector rhs = std::pow(alpha, m - 1) * contract_m1(A, u);
    EXPECT_LT(testing::rel_diff(lhs, rhs), 1e-10);
  });
}

TEST(ContractionProperties, FullEqualsDot) {
  for_all(50, 13, [](Gen& g, std::uint64_t seed) {
    SCOPED_TRACE(seed);
    const int n = g.integer(1, 5), m = g.integer(2, 4);
    const Tensor A = g.tensor(m, n);
    const Vector u = g.vector(n);
    EXPECT_LT(testing::rel_diff(contract_full(A, u), u.dot(contract_m1(A, u))), 1e-10);
  });
}

TEST(ContractionProperties, MatchNaiveReference) {
  for_all(40, 14, [](Gen& g, std::uint64_t seed) {
    SCOPED_TRACE(seed);
    const int n = g.integer(1, 6), m = g.integer(2, 4);
    const Tensor A = g.tensor(m, n);
    const Vector u = g.vector(n);
    EXPECT_LT(testing::rel_diff(contract_m1(A, u), testing::naive_m1(A, u)), 1e-12);
    EXPECT_LT(testing::rel_diff(contract_m2(A, u), testing::naive_m2(A, u)), 1e-12);
    EXPECT_LT(testing::rel_diff(contract_full(A, u), testing::naive_full(A, u)), 1e-12);
  });
}

TEST(SemiSymmetrize, TwoPermutationAverage) {
  Tensor A(3, 2);
  A.set({0, 0, 1}, 2.0);
  const Tensor S = semi_symmetrize(A);
  EXPECT_DOUBLE_EQ((S({0, 0, 1})), 1.0);
  EXPECT_DOUBLE_EQ((S({0, 1, 0})), 1.0);
}

TEST(SemiSymmetrize, FixedPointAndIdempotent) {
  for_all(20, 15, [](Gen& g, std::uint64_t seed) {
    SCOPED_TRACE(seed);
    const int n = g.integer(1, 4), m = g.integer(2, 4);
    const Tensor S = semi_symmetrize(g.tensor(m, n));
    EXPECT_TRUE(is_semi_symmetric(S, 1e-15));
    const Tensor S2 = semi_symmetrize(S);
    for (Eigen::Index k = 0; k < S.size(); ++k) EXPECT_NEAR(S2.data()[k], S.data()[k], 1e-15);
  });
}

TEST(SemiSymmetrize, PreservesContraction) {
  Gen g(16);
  const Tensor A = g.tensor(4, 3);
  const Tensor S = semi_symmetrize(A);
  for (int k = 0; k < 100; ++k) {
    const Vector u = g.vector(3);
    EXPECT_LT(testing::rel_diff(contract_m1(S, u), contract_m1(A, u)), 1e-12);
  }
}

TEST(SemiSymmetricTensor, CheckedRejectsAsymmetric) {
  Tensor A(3, 2);
  A.set({0, 0, 1}, 2.0);
  EXPECT_THROW(SemiSymmetricTensor<double>::checked(A), std::invalid_argument);
  EXPECT_NO_THROW(SemiSymmetricTensor<double>::checked(semi_symmetrize(A)));
}

TEST(IsZTensor, Examples) {
  EXPECT_TRUE(is_z_tensor(Tensor::Identity(3, 2)));
  Tensor A = Tensor::Identity(3, 2);
  A.set({0, 0, 1}, 0.5);
  EXPECT_FALSE(is_z_tensor(A));
  EXPECT_FALSE(is_z_tensor(gen_instance(InstanceKind::kPaperExample, 0, 0, 0).A));
}

TEST(IsZTensor, NegativeDiagonalStillZ) {
  Tensor A(4, 2);
  A.set({1, 1, 1, 1}, -3.0);
  A.set({0, 1, 0, 1}, -1.0);
  EXPECT_TRUE(is_z_tensor(A));
}

TEST(TensorNorm, Examples) {
  EXPECT_EQ(tensor_norm(Tensor(3, 2)), 0.0);
  EXPECT_DOUBLE_EQ(tensor_norm(Tensor::Identity(3, 2)), std::sqrt(2.0));
  // Squares of the nine listed entries: 1 + 2.25 + 4 + 9 + 1 + 1 + 4 + 9 + 1.
  EXPECT_NEAR(tensor_norm(gen_instance(InstanceKind::kPaperExample, 0, 0, 0).A),
              5.67890834580027361, 1e-14);
}

TEST(GenInstance, DiagonalKind) {
  const Instance inst = gen_instance(InstanceKind::kDiagonal, 2, 3, 1);
  EXPECT_TRUE(is_z_tensor(inst.A));
  EXPECT_TRUE(inst.A == Tensor::Identity(3, 2));
  EXPECT_GE(inst.q.minCoeff(), 0.0);
}

TEST(GenInstance, ExampleKindIgnoresArguments) {
  const Instance a = gen_instance(InstanceKind::kPaperExample, 5, 4, 9);
  EXPECT_EQ(a.m(), 3);
  EXPECT_EQ(a.n(), 3);
  EXPECT_EQ(a.source, InstanceSource::kPaperExample);
  EXPECT_DOUBLE_EQ((a.A({0, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ((a.A({1, 1, 1})), 1.5);
  EXPECT_DOUBLE_EQ((a.A({2, 2, 2})), 2.0);
  EXPECT_DOUBLE_EQ((a.A({0, 2, 0})), -3.0);
  EXPECT_DOUBLE_EQ((a.A({0, 0, 2})), 1.0);
  EXPECT_DOUBLE_EQ((a.A({0, 2, 2})), -1.0);
  EXPECT_DOUBLE_EQ((a.A({2, 0, 0})), -2.0);
  EXPECT_DOUBLE_EQ((a.A({2, 0, 2})), 3.0);
  EXPECT_DOUBLE_EQ((a.A({2, 2, 0})), 1.0);
  EXPECT_EQ(a.q, Vector::LinSpaced(3, -1.0, 1.0));
  int nonzeros = 0;
  for (double v : a.A.entries()) nonzeros += v != 0.0;
  EXPECT_EQ(nonzeros, 9);
}

TEST(GenInstance, Deterministic) {
  for (InstanceKind k : {InstanceKind::kDiagonal, InstanceKind::kZFeasible, InstanceKind::kRandom}) {
    const Instance a = gen_instance(k, 4, 3, 77);
    const Instance b = gen_instance(k, 4, 3, 77);
    EXPECT_TRUE(a.A == b.A);
    EXPECT_EQ(a.q, b.q);
    EXPECT_EQ(a.label, b.label);
  }
}

TEST(GenInstance, ZFeasibleIsZAndPlanted) {
  for (int seed = 0; seed < 40; ++seed) {
    const int n = 1 + seed % 5;
    const Instance inst = gen_instance(InstanceKind::kZFeasible, n, 3 + seed % 2, seed);
    EXPECT_TRUE(is_z_tensor(inst.A)) << seed;
    EXPECT_TRUE(is_semi_symmetric(inst.A, 1e-14)) << seed;
    ASSERT_TRUE(inst.planted.has_value());
    const Vector w = tcp_map(inst.A, inst.q, *inst.planted);
    EXPECT_GE(w.minCoeff(), -1e-12) << seed;
    EXPECT_LT(std::abs(inst.planted->dot(w)), 1e-12) << seed;
  }
}

TEST(GenInstance, PlantCardHonoured) {
  for (int c = 1; c <= 4; ++c) {
    const Instance inst = gen_instance(InstanceKind::kZFeasible, 4, 3, 5, {c});
    int nz = 0;
    for (int i = 0; i < 4; ++i) nz += (*inst.planted)[i] > 0.0;
    EXPECT_EQ(nz, c);
  }
}

TEST(GenInstance, RejectsBadArguments) {
  EXPECT_THROW(gen_instance(InstanceKind::kRandom, 0, 3, 0), std::invalid_argument);
  EXPECT_THROW(gen_instance(InstanceKind::kRandom, 2, 1, 0), std::invalid_argument);
  EXPECT_THROW(parse_instance_kind("cubic"), std::invalid_argument);
  EXPECT_EQ(parse_instance_kind("z_feasible"), InstanceKind::kZFeasible);
}

TEST(Instance, QLengthMustMatch) {
  EXPECT_THROW(Instance(Tensor::Identity(3, 2), Vector::Ones(3)), std::invalid_argument);
}

}  // namespace
}  // namespace sparse_tcp
