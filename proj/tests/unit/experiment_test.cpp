#include <gtest/gtest.h>

#include "tcatch/experiment.hpp"
#include "tcatch/simulation.hpp"

using namespace tcatch;

namespace {

SimulationSpec small_covariate_spec() {
  SimulationSpec s;
  s.name = "smallC";
  s.shape = TensorShape{6, 5, 4};
  s.class_sizes = {40, 40};
  s.covariances = {{CovKind::ar, 0.5, 6}, {CovKind::identity, 0.0, 5}, {CovKind::cs, 0.3, 4}};
  s.coefficients = {{Placement{{{1, 2}, {1, 2}, {1}}, 0.9}}};
  s.num_covariates = 2;
  s.phi = {Vector::Zero(2), Vector::Constant(2, 0.5)};
  s.psi = Matrix::Identity(2, 2);
  s.alpha_star = {Placement{{{1, 2, 3}, {1, 2, 3}, {1, 2}, {1}}, 1.0}};
  s.test_size = 1200;
  return s;
}

} // namespace

TEST(Methods, NamesRoundTrip) {
  for (auto m : {Method::catch_xu, Method::catch_x, Method::bayes, Method::tensor_oracle,
                 Method::vector_oracle})
    EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_EQ(method_name(Method::catch_xu), "catch");
  EXPECT_THROW(parse_method("svm"), std::invalid_argument);
}

TEST(Experiment, AllMethodsRun) {
  const auto spec = small_covariate_spec();
  ExperimentConfig cfg;
  cfg.methods = {Method::catch_xu, Method::catch_x, Method::bayes, Method::tensor_oracle,
                 Method::vector_oracle};
  cfg.replicates = 2;
  cfg.seed = 9;
  const auto result = run_experiments(spec, cfg);
  ASSERT_EQ(result.methods.size(), 5u);
  EXPECT_EQ(result.model, "smallC");
  for (const auto& m : result.methods) {
    EXPECT_EQ(m.replicates, 2u);
    EXPECT_GE(m.mean_error, 0.0);
    EXPECT_LE(m.mean_error, 1.0);
  }
  const auto& catch_xu = result.methods[0];
  ASSERT_TRUE(catch_xu.mean_tpr.has_value());
  EXPECT_GT(catch_xu.fits, 0u);
  EXPECT_TRUE(catch_xu.all_converged);
  EXPECT_TRUE(catch_xu.all_monotone);
  EXPECT_LE(catch_xu.max_kkt, 1e-6);
  EXPECT_FALSE(result.methods[2].mean_tpr.has_value());
  // The Bayes rule is the best possible; with 1200 test points it should not
  // lose to a fitted rule by more than noise.
  EXPECT_LE(result.methods[2].mean_error, catch_xu.mean_error + 0.03);
}

TEST(Experiment, BayesMatchesDirectComputation) {
  const auto spec = small_covariate_spec();
  const auto s = run_experiment(spec, Method::bayes, 1, 4);
  const auto truth = true_parameters(spec);
  const auto rep = generate(spec, truth, 4, 0);
  EXPECT_EQ(s.mean_error, bayes_rule_error(truth, rep.test));
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  const auto spec = small_covariate_spec();
  ExperimentConfig cfg;
  cfg.methods = {Method::catch_xu, Method::bayes};
  cfg.replicates = 3;
  cfg.seed = 2;
  cfg.threads = 1;
  const auto a = run_experiments(spec, cfg);
  cfg.threads = 3;
  const auto b = run_experiments(spec, cfg);
  for (std::size_t m = 0; m < a.methods.size(); ++m) {
    EXPECT_EQ(a.methods[m].mean_error, b.methods[m].mean_error);
    EXPECT_EQ(a.methods[m].se_error, b.methods[m].se_error);
    for (std::size_t r = 0; r < 3; ++r)
      EXPECT_EQ(a.methods[m].outcomes[r].lambda, b.methods[m].outcomes[r].lambda);
  }
}
