#pragma once

#include <cstddef>
#include <vector>

#include "tcatch/dataset.hpp"
#include "tcatch/pipeline.hpp"

namespace tcatch {

/// Index of the smallest error; ties go to the earliest (largest lambda).
std::size_t select_index(const std::vector<double>& errors);

/// Misclassification rate of every path point on held-out data.
std::vector<double> path_errors(const CatchFit& fit, const LabeledDataset& holdout);

struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> mean_error;               // per lambda
  std::vector<std::vector<double>> fold_error;  // [fold][lambda]
  std::size_t chosen_index = 0;
  double chosen_lambda = 0.0;
};

/// Stratified fold of every observation: the i-th member of each class goes
/// to fold i mod folds. Throws DataError when a class has fewer members than
/// folds, since some fold would then miss that class.
std::vector<std::size_t> stratified_folds(const std::vector<int>& y, int num_classes,
                                          std::size_t folds);

/// Lambda grid from the full data, then one warm-started path per fold.
CvResult cross_validate(const LabeledDataset& data, const CatchConfig& config,
                        std::size_t folds);

} // namespace tcatch
