#include "tcatch/tuning.hpp"

#include <stdexcept>
#include <string>

#include "tcatch/classifier.hpp"
#include "tcatch/errors.hpp"

namespace tcatch {

std::size_t select_index(const std::vector<double>& errors) {
  if (errors.empty()) throw std::invalid_argument("no errors to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < errors.size(); ++i)
    if (errors[i] < errors[best]) best = i;
  return best;
}

std::vector<double> path_errors(const CatchFit& fit, const LabeledDataset& holdout) {
  std::vector<double> out;
  out.reserve(fit.path.points.size());
  for (std::size_t i = 0; i < fit.path.points.size(); ++i)
    out.push_back(error_rate(model_at(fit, i), holdout));
  return out;
}

std::vector<std::size_t> stratified_folds(const std::vector<int>& y, int num_classes,
                                          std::size_t folds) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  const auto counts = class_counts(y, num_classes);
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] < folds)
      throw DataError("class " + std::to_string(k + 1) + " has " + std::to_string(counts[k]) +
                      " observations, fewer than " + std::to_string(folds) +
                      " folds; some fold would miss it");
  std::vector<std::size_t> seen(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::size_t> fold(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto& s = seen[static_cast<std::size_t>(y[i] - 1)];
    fold[i] = s++ % folds;
  }
  return fold;
}

CvResult cross_validate(const LabeledDataset& data, const CatchConfig& config,
                        std::size_t folds) {
  validate(data, true);
  const auto assignment = stratified_folds(data.y, data.num_classes, folds);

  CvResult result;
  {
    const CatchModel full = estimate_model(data, config.estimation);
    result.lambdas = lambda_grid(solver_inputs(full), config.solver, data.size());
  }
  CatchConfig fold_config = config;
  fold_config.solver.lambdas = result.lambdas;

  result.mean_error.assign(result.lambdas.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      (assignment[i] == f ? test : train).push_back(i);
    const LabeledDataset train_data = subset(data, train);
    const LabeledDataset test_data = subset(data, test);
    const CatchFit fit = fit_catch(train_data, fold_config);
    auto errors = path_errors(fit, test_data);
    for (std::size_t l = 0; l < errors.size(); ++l)
      result.mean_error[l] += errors[l] / static_cast<double>(folds);
    result.fold_error.push_back(std::move(errors));
  }
  result.chosen_index = select_index(result.mean_error);
  result.chosen_lambda = result.lambdas[result.chosen_index];
  return result;
}

} // namespace tcatch
