#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tcatch/tensor.hpp"

namespace tcatch {

/// n labelled observations stacked along the last mode of `x`.
///
/// `u`, when present, is n x q with one covariate row per observation.
/// Labels are 1-based class indices in 1..num_classes.
struct LabeledDataset {
  DenseTensor x;
  std::optional<Matrix> u;
  std::vector<int> y;
  int num_classes = 0;

  std::size_t size() const { return y.size(); }
  /// Shape of a single observation (x without its last mode).
  TensorShape observation_shape() const { return x.shape().drop(x.order() - 1); }
  std::size_t num_covariates() const { return u ? static_cast<std::size_t>(u->cols()) : 0; }
  bool has_covariates() const { return u.has_value(); }
};

/// Checks sizes agree across x, u and y and labels are in 1..K. With
/// `require_all_classes`, also checks every class appears and n >= K + 1.
void validate(const LabeledDataset& data, bool require_all_classes);

/// Per-class observation counts n_1..n_K.
std::vector<std::size_t> class_counts(const std::vector<int>& y, int num_classes);

/// Subset of observations in the given order.
LabeledDataset subset(const LabeledDataset& data, const std::vector<std::size_t>& rows);

/// Copy without covariates.
LabeledDataset drop_covariates(const LabeledDataset& data);

} // namespace tcatch
