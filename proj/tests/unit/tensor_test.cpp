#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tcatch/errors.hpp"
#include "tcatch/tensor.hpp"

using namespace tcatch;

namespace {

DenseTensor iota(const TensorShape& shape) {
  DenseTensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
  return t;
}

std::vector<TensorShape> small_shapes() {
  std::vector<TensorShape> out;
  for (std::size_t a = 1; a <= 3; ++a)
    for (std::size_t b = 1; b <= 3; ++b) {
      out.push_back(TensorShape{a, b});
      for (std::size_t c = 1; c <= 3; ++c) out.push_back(TensorShape{a, b, c});
    }
  return out;
}

// Column of A_{i1..iM} in T_(k) from the index formula (all 1-based).
std::size_t unfold_column(const std::vector<std::size_t>& idx, const TensorShape& s, std::size_t k) {
  std::size_t col = 1, stride = 1;
  for (std::size_t m = 0; m < s.order(); ++m) {
    if (m == k) continue;
    col += (idx[m] - 1) * stride;
    stride *= s[m];
  }
  return col;
}

} // namespace

TEST(TensorShape, RejectsEmptyModes) {
  EXPECT_THROW(TensorShape({2, 0, 3}), DimensionError);
  EXPECT_THROW(TensorShape(std::vector<std::size_t>{}), DimensionError);
  EXPECT_NO_THROW(TensorShape({2, 3, 0}));
  EXPECT_EQ(TensorShape({2, 3, 4}).size(), 24u);
}

TEST(Vec, MatrixIsColumnMajor) {
  Matrix m(2, 2);
  m << 1, 3, 2, 4;
  const Vector v = vec(DenseTensor::from_matrix(m));
  EXPECT_EQ(v, (Vector(4) << 1, 2, 3, 4).finished());
}

TEST(Vec, LengthIsProductOfDims) {
  EXPECT_EQ(vec(DenseTensor(TensorShape{2, 3, 4})).size(), 24);
}

TEST(Vec, PositionFormulaExample) {
  const TensorShape s{2, 3, 2};
  EXPECT_EQ(multi_to_linear(MultiIndex{{2, 3, 1}}, s), 6u);
  const DenseTensor t = iota(s);
  EXPECT_EQ(t.at(MultiIndex{{2, 3, 1}}), 6.0);
}

TEST(LinearToMultiIndex, Examples) {
  const TensorShape s{2, 3, 2};
  EXPECT_EQ(linear_to_multi_index(1, s).coords, (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(linear_to_multi_index(7, s).coords, (std::vector<std::size_t>{1, 1, 2}));
  EXPECT_EQ(linear_to_multi_index(12, s).coords, (std::vector<std::size_t>{2, 3, 2}));
  EXPECT_THROW(linear_to_multi_index(0, s), DimensionError);
  EXPECT_THROW(linear_to_multi_index(13, s), DimensionError);
}

TEST(LinearToMultiIndex, RoundTripAndUnravel) {
  for (const auto& s : small_shapes()) {
    std::vector<std::size_t> coords(s.order());
    for (std::size_t j = 1; j <= s.size(); ++j) {
      const MultiIndex idx = linear_to_multi_index(j, s);
      EXPECT_EQ(multi_to_linear(idx, s), j);
      unravel(j - 1, s, coords);
      for (std::size_t m = 0; m < s.order(); ++m) EXPECT_EQ(coords[m] + 1, idx.coords[m]);
    }
  }
}

TEST(ModeMatricize, MatrixCases) {
  std::mt19937_64 rng(1);
  const Matrix m = oracle::random_matrix(3, 4, rng);
  const DenseTensor t = DenseTensor::from_matrix(m);
  EXPECT_EQ(mode_matricize(t, 0), m);
  EXPECT_EQ(mode_matricize(t, 1), Matrix(m.transpose()));
  EXPECT_THROW(mode_matricize(t, 2), DimensionError);
}

TEST(ModeMatricize, AgreesWithIndexFormulaExhaustively) {
  for (const auto& s : small_shapes()) {
    const DenseTensor t = iota(s);
    for (std::size_t k = 0; k < s.order(); ++k) {
      const Matrix unfolded = mode_matricize(t, k);
      ASSERT_EQ(static_cast<std::size_t>(unfolded.rows()), s[k]);
      for (std::size_t j = 1; j <= s.size(); ++j) {
        const auto idx = linear_to_multi_index(j, s).coords;
        const auto col = unfold_column(idx, s, k);
        EXPECT_EQ(unfolded(static_cast<Eigen::Index>(idx[k] - 1), static_cast<Eigen::Index>(col - 1)),
                  static_cast<double>(j));
      }
      EXPECT_EQ(fold(unfolded, k, s).as_vector(), t.as_vector());
    }
  }
}

TEST(ModeProduct, IdentityAndZero) {
  std::mt19937_64 rng(2);
  const DenseTensor t = oracle::random_tensor(TensorShape{2, 3, 4}, rng);
  EXPECT_EQ(mode_product(t, 1, Matrix::Identity(3, 3)).as_vector(), t.as_vector());
  const DenseTensor z(TensorShape{2, 3, 4});
  const DenseTensor r = mode_product(z, 2, oracle::random_matrix(5, 4, rng));
  EXPECT_EQ(r.shape(), (TensorShape{2, 3, 5}));
  EXPECT_TRUE(r.as_vector().isZero(0.0));
}

TEST(ModeProduct, MatchesMatricizationOracle) {
  std::mt19937_64 rng(3);
  const DenseTensor t = oracle::random_tensor(TensorShape{2, 2, 2}, rng);
  const Matrix m = oracle::random_matrix(3, 2, rng);
  for (std::size_t k = 0; k < 3; ++k) {
    const DenseTensor r = mode_product(t, k, m);
    const Matrix expected = m * mode_matricize(t, k);
    EXPECT_LE((mode_matricize(r, k) - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(mode_product(t, 0, oracle::random_matrix(3, 3, rng)), DimensionError);
}

TEST(ModeProduct, CommutesAcrossModes) {
  std::mt19937_64 rng(4);
  const DenseTensor t = oracle::random_tensor(TensorShape{3, 2, 4}, rng);
  const Matrix a = oracle::random_matrix(5, 3, rng), b = oracle::random_matrix(2, 2, rng);
  const DenseTensor ab = mode_product(mode_product(t, 0, a), 1, b);
  const DenseTensor ba = mode_product(mode_product(t, 1, b), 0, a);
  EXPECT_LE((ab.as_vector() - ba.as_vector()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ModeVectorProduct, UnitVectorGivesSlice) {
  const DenseTensor t = iota(TensorShape{2, 3, 2});
  Vector e = Vector::Zero(3);
  e(1) = 1.0;
  const DenseTensor s = mode_vector_product(t, 1, e);
  ASSERT_EQ(s.shape(), (TensorShape{2, 2}));
  for (std::size_t i = 1; i <= 2; ++i)
    for (std::size_t l = 1; l <= 2; ++l)
      EXPECT_EQ(s.at(MultiIndex{{i, l}}), t.at(MultiIndex{{i, 2, l}}));
}

TEST(ModeVectorProduct, ZeroAndMatrixVector) {
  std::mt19937_64 rng(5);
  const Vector v = oracle::random_matrix(3, 1, rng).col(0);
  EXPECT_TRUE(mode_vector_product(DenseTensor(TensorShape{2, 3}), 1, v).as_vector().isZero(0.0));
  const Matrix m = oracle::random_matrix(2, 3, rng);
  const DenseTensor r = mode_vector_product(DenseTensor::from_matrix(m), 1, v);
  EXPECT_LE((r.as_vector() - m * v).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(mode_vector_product(DenseTensor::from_matrix(m), 1, Vector::Zero(2)), DimensionError);
}

TEST(Tucker, IdentityFactorsAndZeroCore) {
  std::mt19937_64 rng(6);
  const DenseTensor c = oracle::random_tensor(TensorShape{2, 3}, rng);
  const std::vector<Matrix> eye{Matrix::Identity(2, 2), Matrix::Identity(3, 3)};
  EXPECT_EQ(tucker(c, eye).as_vector(), c.as_vector());
  const std::vector<Matrix> g{oracle::random_matrix(2, 2, rng), oracle::random_matrix(4, 3, rng)};
  EXPECT_TRUE(tucker(DenseTensor(TensorShape{2, 3}), g).as_vector().isZero(0.0));
  EXPECT_THROW(tucker(c, std::vector<Matrix>{Matrix::Identity(2, 2)}), DimensionError);
}

TEST(Tucker, MatchesExplicitKronecker) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const TensorShape s = rep % 2 ? TensorShape{2, 2} : TensorShape{2, 3, 2};
    const DenseTensor c = oracle::random_tensor(s, rng);
    std::vector<Matrix> g;
    for (std::size_t m = 0; m < s.order(); ++m) g.push_back(oracle::random_matrix(s[m] + m % 2, s[m], rng));
    const Vector expected = oracle::kronecker(g) * c.as_vector();
    EXPECT_LE((tucker(c, g).as_vector() - expected).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Inner, Cases) {
  DenseTensor ones(TensorShape{2, 2});
  for (double& v : ones.data()) v = 1.0;
  EXPECT_EQ(inner(ones, ones), 4.0);
  EXPECT_EQ(inner(DenseTensor(TensorShape{2, 2}), ones), 0.0);
  std::mt19937_64 rng(8);
  const DenseTensor a = oracle::random_tensor(TensorShape{3, 2, 2}, rng);
  const DenseTensor b = oracle::random_tensor(TensorShape{3, 2, 2}, rng);
  EXPECT_NEAR(inner(a, b), a.as_vector().dot(b.as_vector()), 1e-12);
  EXPECT_THROW(inner(a, ones), DimensionError);
}

TEST(DenseTensor, SliceAndReshape) {
  const DenseTensor t = iota(TensorShape{2, 2, 3});
  const DenseTensor s = t.slice_last(2);
  EXPECT_EQ(s.shape(), (TensorShape{2, 2}));
  EXPECT_EQ(s[0], 9.0);
  EXPECT_THROW(t.reshaped(TensorShape{5}), DimensionError);
  EXPECT_THROW(DenseTensor(TensorShape{2}, std::vector<double>{1.0}), DimensionError);
}
