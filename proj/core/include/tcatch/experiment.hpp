#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcatch/pipeline.hpp"
#include "tcatch/simulation.hpp"

namespace tcatch {

/// catch uses covariates when the model has them; catch_x ignores them.
enum class Method { catch_xu, catch_x, bayes, tensor_oracle, vector_oracle };

std::string method_name(Method method);
/// Throws std::invalid_argument for unknown names.
Method parse_method(const std::string& name);

struct ExperimentConfig {
  std::vector<Method> methods{Method::catch_xu};
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  CatchConfig catch_config;
  /// Replicates run on up to this many threads; results do not depend on it.
  std::size_t threads = 1;
};

struct ReplicateOutcome {
  double error = 0.0;
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> lambda;
  // Solver diagnostics over every path point (catch methods only).
  std::size_t fits = 0;
  bool all_converged = true;
  bool all_monotone = true;
  double max_kkt = 0.0;
};

struct MethodSummary {
  Method method = Method::catch_xu;
  std::size_t replicates = 0;
  double mean_error = 0.0;
  double se_error = 0.0;
  std::optional<double> mean_tpr;
  std::optional<double> mean_fpr;
  std::size_t fits = 0;
  bool all_converged = true;
  bool all_monotone = true;
  double max_kkt = 0.0;
  std::vector<ReplicateOutcome> outcomes;
};

struct ExperimentResult {
  std::string model;
  std::vector<MethodSummary> methods;
};

/// Per replicate: generate data, fit every method on the same training set,
/// tune catch on the validation set by minimum error (ties to the larger
/// lambda), and evaluate all methods on the same test stream.
ExperimentResult run_experiments(const SimulationSpec& spec, const ExperimentConfig& config);

MethodSummary run_experiment(const SimulationSpec& spec, Method method, std::size_t replicates,
                             std::uint64_t seed, const CatchConfig& catch_config = {});

/// Discriminant restricted to the positions in `support`, solved without a
/// penalty: beta_D = Sigma_DD^{-1} delta_D with the estimated Kronecker covariance.
CatchModel tensor_oracle_model(const LabeledDataset& train, const std::vector<std::size_t>& support,
                               bool use_covariates);

/// Plain LDA on the tensor entries in `support` (plus covariates), pooled
/// covariance with divisor n - K.
class VectorOracle {
public:
  VectorOracle(const LabeledDataset& train, const std::vector<std::size_t>& support,
               bool use_covariates);
  std::vector<int> labels(const LabeledDataset& data) const;

private:
  Matrix features(const LabeledDataset& data) const;  // n x d

  std::vector<std::size_t> support_;
  bool use_covariates_;
  Matrix weights_;  // d x K
  Vector offsets_;  // K
};

} // namespace tcatch
