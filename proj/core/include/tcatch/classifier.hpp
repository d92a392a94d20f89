#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tcatch/dataset.hpp"
#include "tcatch/estimation.hpp"
#include "tcatch/tensor.hpp"

namespace tcatch {

struct Prediction {
  int label = 1;
  std::vector<double> scores;  // K entries, scores[0] == 0
};

struct SelectionMetrics {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// a_1..a_K with a_1 = 0:
/// a_k = log(pi_k/pi_1) - gamma_k'(phi_k + phi_1)/2 - <B_k, (mu_k + mu_1)/2>.
std::vector<double> compute_intercepts(const CatchModel& model);

/// Copy of `model` carrying the coefficient groups in `beta` ((K-1) x p) as
/// B_2..B_K and the matching intercepts.
CatchModel with_coefficients(CatchModel model, const Matrix& beta);

/// Highest score, smallest label on ties.
int argmax_label(const std::vector<double>& scores);

/// argmax_k a_k + gamma_k'u + <B_k, x - alpha x_{M+1} u>. `u` must be given
/// exactly when the model has a covariate block.
Prediction classify(const CatchModel& model, const DenseTensor& x,
                    const std::optional<Vector>& u = std::nullopt);

/// Scores many observations against one model. Only nonzero coefficients are
/// touched, and alpha enters through the precomputed w_k = alpha' vec(B_k).
class BatchScorer {
public:
  explicit BatchScorer(const CatchModel& model);

  int num_classes() const { return num_classes_; }
  bool needs_covariates() const { return num_covariates_ > 0; }

  /// x stacks observations along its last mode; u is n x q or absent.
  std::vector<Prediction> predict(const DenseTensor& x,
                                  const std::optional<Matrix>& u) const;
  std::vector<int> labels(const DenseTensor& x, const std::optional<Matrix>& u) const;

private:
  void check(const DenseTensor& x, const std::optional<Matrix>& u) const;
  void score(const double* x, const double* u, std::size_t u_stride,
             std::vector<double>& out) const;

  int num_classes_ = 0;
  std::size_t p_ = 0;
  TensorShape shape_;
  std::size_t num_covariates_ = 0;
  std::vector<double> intercepts_;
  std::vector<std::size_t> support_;  // positions where some B_k is nonzero
  Matrix support_values_;             // (K-1) x |support|
  Matrix covariate_weights_;          // (K-1) x q: gamma_k - w_k
};

std::vector<Prediction> classify_batch(const CatchModel& model, const DenseTensor& x,
                                       const std::optional<Matrix>& u = std::nullopt);

/// Fraction of mismatches; 0 for empty input.
double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);
double error_rate(const CatchModel& model, const LabeledDataset& data);

/// TPR = |est & truth| / |truth|, FPR = |est \ truth| / (total - |truth|).
/// Positions are 0-based vec positions. Throws DataError for an empty truth set.
SelectionMetrics selection_metrics(const std::vector<std::size_t>& estimated,
                                   const std::vector<std::size_t>& truth,
                                   std::size_t total_positions);

} // namespace tcatch
