#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tcatch/classifier.hpp"
#include "tcatch/errors.hpp"
#include "tcatch/simulation.hpp"

using namespace tcatch;

namespace {

// K = 3, shape (3, 3), q = 2, correlated modes and a nonzero alpha.
SimulationSpec small_spec() {
  SimulationSpec s;
  s.name = "small";
  s.shape = TensorShape{3, 3};
  s.class_sizes = {20, 30, 50};
  s.covariances = {{CovKind::ar, 0.5, 3}, {CovKind::cs, 0.3, 3}};
  s.coefficients = {{Placement{{{1, 2}, {1}}, 0.8}}, {Placement{{{3}, {2, 3}}, -0.6}}};
  s.num_covariates = 2;
  Vector a(2), b(2), c(2);
  a << 0, 0;
  b << 0.5, -0.3;
  c << -0.4, 0.9;
  s.phi = {a, b, c};
  s.psi = Matrix::Identity(2, 2);
  s.psi(0, 1) = s.psi(1, 0) = 0.2;
  s.alpha_star = {Placement{{{1, 3}, {2}, {1, 2}}, 0.7}};
  return s;
}

CatchModel toy_model() {
  CatchModel m;
  m.priors = {0.5, 0.5};
  m.mu = {DenseTensor(TensorShape{2, 2}), DenseTensor(TensorShape{2, 2})};
  m.sigmas = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  m.coefficients = {DenseTensor(TensorShape{2, 2})};
  m.intercepts = compute_intercepts(m);
  return m;
}

} // namespace

TEST(Intercepts, Examples) {
  auto m = toy_model();
  EXPECT_EQ(m.intercepts, (std::vector<double>{0.0, 0.0}));
  m.priors = {1.0 / 3.0, 2.0 / 3.0};
  EXPECT_NEAR(compute_intercepts(m)[1], std::log(2.0), 1e-15);

  const CatchModel ex1 = bayes_model(true_parameters(example1_spec(1.0)));
  EXPECT_NEAR(ex1.coefficients[0][0], 2.0, 1e-12);
  EXPECT_NEAR(ex1.intercepts[1], -2.0, 1e-12);
}

TEST(Classify, ConstantRuleFollowsPriors) {
  auto m = toy_model();
  m.priors = {0.4, 0.6};
  m.intercepts = compute_intercepts(m);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i)
    EXPECT_EQ(classify(m, oracle::random_tensor(TensorShape{2, 2}, rng)).label, 2);
}

TEST(Classify, ExampleOnePoint) {
  const CatchModel ex1 = bayes_model(true_parameters(example1_spec(3.0)));
  DenseTensor x(TensorShape{2, 2});
  x[0] = 2.0;
  Vector u = Vector::Zero(1);
  const auto pred = classify(ex1, x, u);
  EXPECT_NEAR(pred.scores[1], 2.0, 1e-12);
  EXPECT_EQ(pred.label, 2);
  EXPECT_THROW(classify(ex1, x), DataError);
  EXPECT_THROW(classify(ex1, DenseTensor(TensorShape{2, 3}), u), DimensionError);
}

TEST(Classify, TiesGoToSmallestLabel) {
  EXPECT_EQ(argmax_label({0.0, 0.0, 0.0}), 1);
  EXPECT_EQ(argmax_label({0.0, 1.0, 1.0}), 2);
  EXPECT_EQ(classify(toy_model(), DenseTensor(TensorShape{2, 2})).label, 1);
}

TEST(Classify, ShiftInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(4);
    for (auto& v : s) v = z(rng);
    const double c = 10.0 * z(rng);
    auto shifted = s;
    for (auto& v : shifted) v += c;
    EXPECT_EQ(argmax_label(s), argmax_label(shifted));
  }
}

TEST(Classify, AgreesWithBruteForceBayes) {
  const auto spec = small_spec();
  const auto truth = true_parameters(spec);
  const CatchModel model = bayes_model(truth);
  Rng rng(3);
  std::vector<int> labels;
  for (int i = 0; i < 300; ++i) labels.push_back(i % 3 + 1);
  const auto data = draw_observations(truth, labels, rng);
  const auto batch = classify_batch(model, data.x, data.u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector u = data.u->row(static_cast<Eigen::Index>(i)).transpose();
    const DenseTensor x = data.x.slice_last(i);
    const int expected = oracle::brute_force_bayes(model, x, u);
    EXPECT_EQ(classify(model, x, u).label, expected);
    EXPECT_EQ(batch[i].label, expected);
  }
}

TEST(Classify, BatchMatchesSingle) {
  const auto truth = true_parameters(small_spec());
  const CatchModel model = bayes_model(truth);
  Rng rng(4);
  const auto data = draw_observations(truth, {1, 2, 3, 3, 2, 1}, rng);
  const BatchScorer scorer(model);
  const auto preds = scorer.predict(data.x, data.u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto single = classify(model, data.x.slice_last(i), Vector(data.u->row(static_cast<Eigen::Index>(i)).transpose()));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(preds[i].scores[k], single.scores[k], 1e-10);
  }
  EXPECT_THROW(scorer.predict(data.x, std::nullopt), DataError);
  EXPECT_THROW(scorer.predict(data.x, Matrix::Zero(6, 3)), DimensionError);
}

TEST(Classify, ZeroCovariateEffectMatchesTensorRule) {
  auto spec = small_spec();
  spec.phi = {Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
  spec.alpha_star.clear();
  const auto truth = true_parameters(spec);
  const CatchModel with = bayes_model(truth);
  CatchModel without = with;
  without.covariates.reset();
  without.alpha.reset();
  without.intercepts = compute_intercepts(without);
  Rng rng(6);
  const auto data = draw_observations(truth, {1, 2, 3, 1, 2, 3, 1, 2}, rng);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const DenseTensor x = data.x.slice_last(i);
    const Vector u = data.u->row(static_cast<Eigen::Index>(i)).transpose();
    const auto a = classify(with, x, u);
    const auto b = classify(without, x);
    EXPECT_EQ(a.label, b.label);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.scores[k], b.scores[k], 1e-12);
  }
}

TEST(ErrorRate, Examples) {
  EXPECT_EQ(error_rate({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(error_rate({1, 1, 1, 1}, {1, 2, 1, 2}), 0.5);
  EXPECT_EQ(error_rate(std::vector<int>{}, std::vector<int>{}), 0.0);
  EXPECT_THROW(error_rate({1}, {1, 2}), DimensionError);
}

TEST(Selection, Examples) {
  const std::vector<std::size_t> truth{1, 4};
  auto m = selection_metrics(truth, truth, 10);
  EXPECT_EQ(m.tpr, 1.0);
  EXPECT_EQ(m.fpr, 0.0);
  m = selection_metrics({}, truth, 10);
  EXPECT_EQ(m.tpr, 0.0);
  EXPECT_EQ(m.fpr, 0.0);
  std::vector<std::size_t> all(10);
  for (std::size_t i = 0; i < 10; ++i) all[i] = i;
  m = selection_metrics(all, truth, 10);
  EXPECT_EQ(m.tpr, 1.0);
  EXPECT_EQ(m.fpr, 1.0);
  m = selection_metrics({1, 2}, truth, 10);
  EXPECT_EQ(m.tpr, 0.5);
  EXPECT_EQ(m.fpr, 0.125);
  EXPECT_THROW(selection_metrics({1}, {}, 10), DataError);
}
