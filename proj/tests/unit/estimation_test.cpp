#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tcatch/errors.hpp"
#include "tcatch/estimation.hpp"
#include "tcatch/simulation.hpp"

using namespace tcatch;

namespace {

// Balanced K-class sample: class k has mean k * shift at entry 0, covariate
// rows N(k, 1) leaking into the tensor through alpha_true.
LabeledDataset make_data(const TensorShape& shape, std::size_t per_class, int k, std::size_t q,
                         std::uint64_t seed, double alpha_scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  const std::size_t n = per_class * static_cast<std::size_t>(k);
  LabeledDataset d;
  d.num_classes = k;
  d.x = DenseTensor(shape.append(n));
  const std::size_t p = shape.size();
  Matrix alpha = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
  for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha(i) = alpha_scale * z(rng);
  if (q > 0) d.u = Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i / per_class) + 1;
    d.y.push_back(label);
    Vector u(static_cast<Eigen::Index>(q));
    for (std::size_t c = 0; c < q; ++c) u(static_cast<Eigen::Index>(c)) = label + z(rng);
    if (q > 0) d.u->row(static_cast<Eigen::Index>(i)) = u.transpose();
    Vector x = alpha * u;
    for (std::size_t j = 0; j < p; ++j) x(static_cast<Eigen::Index>(j)) += z(rng);
    x(0) += label;
    std::copy(x.data(), x.data() + p, d.x.data().begin() + static_cast<std::ptrdiff_t>(i * p));
  }
  return d;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST(Priors, Examples) {
  EXPECT_EQ(estimate_priors({1, 1, 2, 2}, 2), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(estimate_priors({1, 2, 2, 2}, 2), (std::vector<double>{0.25, 0.75}));
  std::vector<int> y(40, 1);
  y.insert(y.end(), 200, 2);
  const auto pi = estimate_priors(y, 2);
  EXPECT_NEAR(pi[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(pi[1], 5.0 / 6.0, 1e-15);
  EXPECT_THROW(estimate_priors({1, 1, 1}, 2), DataError);
}

TEST(CovariateBlock, DegenerateScatterIsSingular) {
  Matrix u(4, 1);
  u << 1, 1, 3, 3;
  EXPECT_THROW(estimate_covariate_block(u, {1, 1, 2, 2}, 2), NumericalError);
}

TEST(CovariateBlock, EqualMeansGiveZeroGamma) {
  Matrix u(4, 2);
  u << 1, 0, -1, 2, 1, 2, -1, 0;
  const auto block = estimate_covariate_block(u, {1, 1, 2, 2}, 2);
  EXPECT_LT(block.gamma[1].cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(block.gamma[0], Vector::Zero(2));
  EXPECT_LT(max_abs(block.psi - block.psi.transpose()), 1e-15);
}

TEST(CovariateBlock, MonteCarloPsiAndGamma) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  const std::size_t n = 100000;
  Matrix u(n, 1);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i < n / 2 ? 1 : 2;
    u(static_cast<Eigen::Index>(i), 0) = (y[i] == 2 ? 0.8 : 0.0) + z(rng);
  }
  const auto block = estimate_covariate_block(u, y, 2);
  EXPECT_NEAR(block.psi(0, 0), 1.0, 0.05);
  EXPECT_NEAR(block.gamma[1](0), block.phi[1](0) - block.phi[0](0), 0.05);
}

TEST(Alpha, MatchesPerEntryOls) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = make_data(TensorShape{3, 2, 2}, 15, 3, 2, seed);
    const DenseTensor alpha = estimate_alpha(d);
    const DenseTensor reference = oracle::per_entry_ols_alpha(d);
    ASSERT_EQ(alpha.shape(), (TensorShape{3, 2, 2, 2}));
    EXPECT_LT((alpha.as_vector() - reference.as_vector()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Alpha, ConstantCovariateWithinClassIsSingular) {
  auto d = make_data(TensorShape{2, 2}, 5, 2, 1, 3);
  for (std::size_t i = 0; i < d.size(); ++i) (*d.u)(static_cast<Eigen::Index>(i), 0) = d.y[i];
  EXPECT_THROW(estimate_alpha(d), NumericalError);
}

TEST(Alpha, IndependentCovariatesGiveSmallAlpha) {
  const auto d = make_data(TensorShape{3, 3}, 5000, 2, 1, 11, 0.0);
  EXPECT_LT(estimate_alpha(d).as_vector().cwiseAbs().maxCoeff(), 0.05);
}

TEST(Mu, HandComputedTwoByTwo) {
  LabeledDataset d;
  d.num_classes = 2;
  d.x = DenseTensor(TensorShape{2, 2, 2}, {1, 2, 3, 4, 1, 1, 1, 1});
  d.u = Matrix(2, 1);
  *d.u << 1, 2;
  d.y = {1, 2};
  const DenseTensor alpha(TensorShape{2, 2, 1}, {1, 0, 0, -1});
  const auto mu = estimate_mu(d, alpha);
  EXPECT_EQ(std::vector<double>(mu[0].data().begin(), mu[0].data().end()),
            (std::vector<double>{0, 2, 3, 5}));
  EXPECT_EQ(std::vector<double>(mu[1].data().begin(), mu[1].data().end()),
            (std::vector<double>{-1, 1, 1, 3}));
}

TEST(Mu, ZeroOrAbsentAlphaGivesClassMeans) {
  const auto d = make_data(TensorShape{2, 3}, 6, 2, 1, 5);
  const auto means = class_means(d);
  const auto plain = estimate_mu(d, std::nullopt);
  const auto zero = estimate_mu(d, DenseTensor(TensorShape{2, 3, 1}));
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(plain[k].as_vector(), means[k].as_vector());
    EXPECT_EQ(zero[k].as_vector(), means[k].as_vector());
  }
}

TEST(Residuals, ClassCenteredAndZeroMean) {
  const auto d = make_data(TensorShape{2, 3}, 8, 3, 2, 9);
  const auto alpha = estimate_alpha(d);
  const DenseTensor e = residuals(d, alpha);
  const std::size_t p = 6;
  for (int k = 1; k <= 3; ++k) {
    Vector sum = Vector::Zero(p);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.y[i] == k) sum += e.slice_last(i).as_vector();
    EXPECT_LT(sum.cwiseAbs().maxCoeff(), 1e-12);
  }
  const DenseTensor centred = residuals(d, std::nullopt);
  const auto means = class_means(d);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_LT((centred.slice_last(i).as_vector() - (d.x.slice_last(i).as_vector() -
                                                    means[static_cast<std::size_t>(d.y[i] - 1)].as_vector()))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-14);
}

TEST(Sigmas, ScalingAndSymmetry) {
  const auto d = make_data(TensorShape{3, 2, 4}, 10, 2, 0, 21);
  const DenseTensor e = residuals(d, std::nullopt);
  const double var = reference_variance(e);
  const auto scatter = mode_scatter(e);
  const auto sigmas = estimate_sigmas(e, var);
  ASSERT_EQ(sigmas.size(), 3u);
  EXPECT_EQ(sigmas[0](0, 0), 1.0);
  EXPECT_EQ(sigmas[1](0, 0), 1.0);
  for (const auto& s : sigmas) EXPECT_EQ(s, s.transpose());
  // Sigma_M(1,1) * prod_{j<M} s~_j11 reproduces the reference variance.
  EXPECT_NEAR(sigmas[2](0, 0) * scatter[0](0, 0) * scatter[1](0, 0), var, 1e-12 * var);
}

TEST(Sigmas, InvariantToObservationOrder) {
  const auto d = make_data(TensorShape{3, 3}, 10, 2, 1, 4);
  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
  const auto a = estimate_model(d);
  const auto b = estimate_model(subset(d, order));
  for (std::size_t m = 0; m < 2; ++m) EXPECT_LT(max_abs(a.sigmas[m] - b.sigmas[m]), 1e-12);
}

TEST(Sigmas, MonteCarloIdentity) {
  const DenseTensor x = sample_tn(DenseTensor(TensorShape{3, 4}), {Matrix::Identity(3, 3), Matrix::Identity(4, 4)},
                                  10000, 99);
  const DenseTensor e = x;  // mean zero, one class
  const auto sigmas = estimate_sigmas(e, reference_variance(e));
  EXPECT_LT(max_abs(sigmas[0] - Matrix::Identity(3, 3)), 0.05);
  EXPECT_LT(max_abs(sigmas[1] - Matrix::Identity(4, 4)), 0.05);
}

TEST(Sigmas, MonteCarloAutoregressive) {
  const Matrix ar = make_cov({CovKind::ar, 0.7, 3});
  LabeledDataset d;
  d.num_classes = 2;
  d.x = sample_tn(DenseTensor(TensorShape{3, 3}), {ar, Matrix::Identity(3, 3)}, 10000, 5);
  for (std::size_t i = 0; i < 10000; ++i) d.y.push_back(i % 2 == 0 ? 1 : 2);
  const auto model = estimate_model(d);
  EXPECT_NEAR(model.sigmas[0](0, 1), 0.7, 0.05);
  EXPECT_NEAR(model.sigmas[1](0, 0), 1.0, 0.05);
}

TEST(PdCondition, Examples) {
  EXPECT_EQ(check_pd_condition(10, 2, TensorShape{4, 4}), (std::vector<bool>{true, true}));
  EXPECT_EQ(check_pd_condition(3, 2, TensorShape{5, 5}), (std::vector<bool>{false, false}));
  EXPECT_EQ(check_pd_condition(3, 2, TensorShape{2, 2}), (std::vector<bool>{false, false}));
  EXPECT_EQ(check_pd_condition(3, 2, TensorShape{2, 3}), (std::vector<bool>{true, false}));
}

TEST(Perturb, Examples) {
  EXPECT_EQ(perturb_sigma(Matrix::Zero(3, 3), 0.1), 0.1 * Matrix::Identity(3, 3));
  EXPECT_EQ(perturb_sigma(Matrix::Identity(2, 2), 1.0), 2.0 * Matrix::Identity(2, 2));
  Vector v(3);
  v << 1, 2, -1;
  const Matrix rank_one = v * v.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(perturb_sigma(rank_one, 0.3));
  EXPECT_GE(eig.eigenvalues().minCoeff(), 0.3 - 1e-12);
  EXPECT_THROW(perturb_sigma(rank_one, 0.0), std::invalid_argument);
}

TEST(EstimateModel, SmallSampleGetsRidge) {
  const auto d = make_data(TensorShape{4, 4}, 2, 2, 0, 8);  // n = 4: (n-K)*4 = 8 > 4 holds
  const auto tiny = make_data(TensorShape{6, 1}, 2, 2, 0, 8);  // (4-2)*1 = 2 < 6 fails mode 1
  const auto model = estimate_model(tiny);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(model.sigmas[0]);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  const auto plain = estimate_model(d);
  EXPECT_EQ(plain.sigmas[0](0, 0), 1.0);
}

TEST(EstimateModel, DropsCovariatesOnRequest) {
  const auto d = make_data(TensorShape{2, 2}, 10, 2, 1, 2);
  EstimationOptions opts;
  opts.use_covariates = false;
  const auto model = estimate_model(d, opts);
  EXPECT_FALSE(model.has_covariates());
  EXPECT_FALSE(model.alpha.has_value());
  const auto full = estimate_model(d);
  EXPECT_TRUE(full.has_covariates());
  EXPECT_NEAR(full.priors[0] + full.priors[1], 1.0, 1e-12);
}
