#include "tcatch/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcatch/errors.hpp"

namespace tcatch {

namespace {

void require_coefficients(const CatchModel& model) {
  const int k = model.num_classes();
  if (k < 2) throw DataError("model needs at least two classes");
  if (static_cast<int>(model.coefficients.size()) != k - 1)
    throw DataError("model has no fitted coefficients");
  if (static_cast<int>(model.mu.size()) != k) throw DataError("model is missing class means");
}

} // namespace

std::vector<double> compute_intercepts(const CatchModel& model) {
  require_coefficients(model);
  const int k_total = model.num_classes();
  std::vector<double> a(static_cast<std::size_t>(k_total), 0.0);
  for (int k = 1; k < k_total; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    double value = std::log(model.priors[ku] / model.priors[0]);
    if (model.covariates) {
      const auto& cov = *model.covariates;
      value -= 0.5 * cov.gamma[ku].dot(cov.phi[ku] + cov.phi[0]);
    }
    const DenseTensor& b = model.coefficients[ku - 1];
    value -= 0.5 * (b.as_vector().dot(model.mu[ku].as_vector() + model.mu[0].as_vector()));
    a[ku] = value;
  }
  return a;
}

CatchModel with_coefficients(CatchModel model, const Matrix& beta) {
  const TensorShape& shape = model.shape();
  if (beta.rows() != model.num_classes() - 1 ||
      static_cast<std::size_t>(beta.cols()) != shape.size())
    throw DimensionError("coefficient matrix does not match model");
  model.coefficients.clear();
  for (Eigen::Index k = 0; k < beta.rows(); ++k) {
    DenseTensor b(shape);
    b.as_vector() = beta.row(k).transpose();
    model.coefficients.push_back(std::move(b));
  }
  model.intercepts = compute_intercepts(model);
  return model;
}

int argmax_label(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return static_cast<int>(best) + 1;
}

BatchScorer::BatchScorer(const CatchModel& model)
    : num_classes_(model.num_classes()), p_(0), shape_(model.shape()) {
  require_coefficients(model);
  p_ = shape_.size();
  intercepts_ = model.intercepts.empty() ? compute_intercepts(model) : model.intercepts;
  if (static_cast<int>(intercepts_.size()) != num_classes_)
    throw DataError("model intercepts do not match class count");

  const auto k1 = static_cast<Eigen::Index>(num_classes_ - 1);
  for (std::size_t j = 0; j < p_; ++j) {
    for (const DenseTensor& b : model.coefficients) {
      if (b[j] != 0.0) {
        support_.push_back(j);
        break;
      }
    }
  }
  support_values_.resize(k1, static_cast<Eigen::Index>(support_.size()));
  for (Eigen::Index k = 0; k < k1; ++k)
    for (std::size_t s = 0; s < support_.size(); ++s)
      support_values_(k, static_cast<Eigen::Index>(s)) =
          model.coefficients[static_cast<std::size_t>(k)][support_[s]];

  if (model.covariates) {
    const auto& cov = *model.covariates;
    num_covariates_ = static_cast<std::size_t>(cov.psi.rows());
    const auto q = static_cast<Eigen::Index>(num_covariates_);
    covariate_weights_.resize(k1, q);
    for (Eigen::Index k = 0; k < k1; ++k)
      covariate_weights_.row(k) = cov.gamma[static_cast<std::size_t>(k + 1)].transpose();
    if (model.alpha) {
      // alpha as a p x q matrix: column t is the mode-(M+1) slice t.
      const auto alpha = model.alpha->as_matrix(static_cast<Eigen::Index>(p_), q);
      for (Eigen::Index k = 0; k < k1; ++k)
        for (std::size_t s = 0; s < support_.size(); ++s)
          covariate_weights_.row(k) -= support_values_(k, static_cast<Eigen::Index>(s)) *
                                       alpha.row(static_cast<Eigen::Index>(support_[s]));
    }
  }
}

void BatchScorer::check(const DenseTensor& x, const std::optional<Matrix>& u) const {
  const TensorShape& xs = x.shape();
  if (xs.order() != shape_.order() + 1)
    throw DimensionError("stacked tensor must have one mode more than the model");
  for (std::size_t m = 0; m < shape_.order(); ++m)
    if (xs[m] != shape_[m])
      throw DimensionError("tensor mode " + std::to_string(m + 1) + " has extent " +
                           std::to_string(xs[m]) + ", model expects " +
                           std::to_string(shape_[m]));
  const std::size_t n = xs[shape_.order()];
  if (num_covariates_ > 0) {
    if (!u) throw DataError("model was fit with covariates; covariates are required");
    if (static_cast<std::size_t>(u->rows()) != n ||
        static_cast<std::size_t>(u->cols()) != num_covariates_)
      throw DimensionError("covariate matrix must be n x " + std::to_string(num_covariates_));
  } else if (u && u->cols() > 0) {
    throw DataError("model was fit without covariates; covariates must not be given");
  }
}

void BatchScorer::score(const double* x, const double* u, std::size_t u_stride,
                        std::vector<double>& out) const {
  out.assign(static_cast<std::size_t>(num_classes_), 0.0);
  for (int k = 1; k < num_classes_; ++k) {
    const auto kr = static_cast<Eigen::Index>(k - 1);
    double s = intercepts_[static_cast<std::size_t>(k)];
    for (std::size_t t = 0; t < support_.size(); ++t)
      s += support_values_(kr, static_cast<Eigen::Index>(t)) * x[support_[t]];
    for (std::size_t t = 0; t < num_covariates_; ++t)
      s += covariate_weights_(kr, static_cast<Eigen::Index>(t)) * u[t * u_stride];
    out[static_cast<std::size_t>(k)] = s;
  }
}

std::vector<Prediction> BatchScorer::predict(const DenseTensor& x,
                                             const std::optional<Matrix>& u) const {
  check(x, u);
  const std::size_t n = x.shape()[shape_.order()];
  std::vector<Prediction> out(n);
  const auto u_stride = u ? static_cast<std::size_t>(u->rows()) : 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ui = num_covariates_ > 0 ? u->data() + i : nullptr;
    score(x.data().data() + i * p_, ui, u_stride, out[i].scores);
    out[i].label = argmax_label(out[i].scores);
  }
  return out;
}

std::vector<int> BatchScorer::labels(const DenseTensor& x,
                                     const std::optional<Matrix>& u) const {
  check(x, u);
  const std::size_t n = x.shape()[shape_.order()];
  std::vector<int> out(n);
  std::vector<double> scores;
  const auto u_stride = u ? static_cast<std::size_t>(u->rows()) : 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ui = num_covariates_ > 0 ? u->data() + i : nullptr;
    score(x.data().data() + i * p_, ui, u_stride, scores);
    out[i] = argmax_label(scores);
  }
  return out;
}

Prediction classify(const CatchModel& model, const DenseTensor& x, const std::optional<Vector>& u) {
  require_coefficients(model);
  if (x.shape() != model.shape()) throw DimensionError("observation shape does not match model");
  if (model.covariates && !u)
    throw DataError("model was fit with covariates; covariates are required");
  if (!model.covariates && u && u->size() > 0)
    throw DataError("model was fit without covariates; covariates must not be given");

  const std::vector<double> a =
      model.intercepts.empty() ? compute_intercepts(model) : model.intercepts;
  Vector adjusted = x.as_vector();
  if (model.covariates) {
    const auto& cov = *model.covariates;
    if (u->size() != cov.psi.rows()) throw DimensionError("covariate length does not match model");
    if (model.alpha) {
      const auto alpha = model.alpha->as_matrix(adjusted.size(), u->size());
      adjusted -= alpha * (*u);
    }
  }
  Prediction pred;
  pred.scores.assign(static_cast<std::size_t>(model.num_classes()), 0.0);
  for (int k = 1; k < model.num_classes(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    double s = a[ku] + model.coefficients[ku - 1].as_vector().dot(adjusted);
    if (model.covariates) s += model.covariates->gamma[ku].dot(*u);
    pred.scores[ku] = s;
  }
  pred.label = argmax_label(pred.scores);
  return pred;
}

std::vector<Prediction> classify_batch(const CatchModel& model, const DenseTensor& x,
                                       const std::optional<Matrix>& u) {
  return BatchScorer(model).predict(x, u);
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw DimensionError("prediction and label counts differ");
  if (truth.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double error_rate(const CatchModel& model, const LabeledDataset& data) {
  return error_rate(BatchScorer(model).labels(data.x, data.u), data.y);
}

SelectionMetrics selection_metrics(const std::vector<std::size_t>& estimated,
                                   const std::vector<std::size_t>& truth,
                                   std::size_t total_positions) {
  if (truth.empty()) throw DataError("true discriminative set is empty; TPR is undefined");
  std::vector<char> in_truth(total_positions, 0), in_est(total_positions, 0);
  for (std::size_t j : truth) {
    if (j >= total_positions) throw DimensionError("true position out of range");
    in_truth[j] = 1;
  }
  for (std::size_t j : estimated) {
    if (j >= total_positions) throw DimensionError("estimated position out of range");
    in_est[j] = 1;
  }
  std::size_t true_count = 0, hits = 0, false_hits = 0;
  for (std::size_t j = 0; j < total_positions; ++j) {
    true_count += in_truth[j];
    if (in_est[j]) (in_truth[j] ? hits : false_hits) += 1;
  }
  SelectionMetrics m;
  m.tpr = static_cast<double>(hits) / static_cast<double>(true_count);
  const std::size_t nulls = total_positions - true_count;
  m.fpr = nulls == 0 ? 0.0 : static_cast<double>(false_hits) / static_cast<double>(nulls);
  return m;
}

} // namespace tcatch
