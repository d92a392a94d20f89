#include "tcatch/dataset.hpp"

#include <string>

#include "tcatch/errors.hpp"

namespace tcatch {

void validate(const LabeledDataset& data, bool require_all_classes) {
  if (data.x.order() < 2)
    throw DimensionError("dataset tensor must have at least two modes (observations last)");
  const std::size_t n = data.x.dim(data.x.order() - 1);
  if (data.y.size() != n)
    throw DataError("label count " + std::to_string(data.y.size()) +
                    " does not match number of tensor observations " + std::to_string(n));
  if (data.u && static_cast<std::size_t>(data.u->rows()) != n)
    throw DataError("covariate row count " + std::to_string(data.u->rows()) +
                    " does not match number of tensor observations " + std::to_string(n));
  if (data.num_classes < 2) throw DataError("need at least two classes");
  for (int label : data.y)
    if (label < 1 || label > data.num_classes)
      throw DataError("label " + std::to_string(label) + " outside 1.." +
                      std::to_string(data.num_classes));
  if (!require_all_classes) return;
  const auto counts = class_counts(data.y, data.num_classes);
  for (int k = 0; k < data.num_classes; ++k)
    if (counts[static_cast<std::size_t>(k)] == 0)
      throw DataError("class " + std::to_string(k + 1) + " has no observations");
  if (n < static_cast<std::size_t>(data.num_classes) + 1)
    throw DataError("need at least K + 1 observations");
  if (data.u && static_cast<std::size_t>(data.u->cols()) >= n)
    throw DataError("number of covariates must be smaller than the sample size");
}

std::vector<std::size_t> class_counts(const std::vector<int>& y, int num_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int label : y) ++counts.at(static_cast<std::size_t>(label - 1));
  return counts;
}

LabeledDataset subset(const LabeledDataset& data, const std::vector<std::size_t>& rows) {
  const std::size_t block = data.x.shape().stride(data.x.order() - 1);
  LabeledDataset out;
  out.num_classes = data.num_classes;
  out.x = DenseTensor(data.observation_shape().append(rows.size()));
  if (data.u) out.u = Matrix(static_cast<Eigen::Index>(rows.size()), data.u->cols());
  out.y.reserve(rows.size());
  const double* src = data.x.data().data();
  double* dst = out.x.data().data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    std::copy(src + i * block, src + (i + 1) * block, dst + r * block);
    if (data.u) out.u->row(static_cast<Eigen::Index>(r)) = data.u->row(static_cast<Eigen::Index>(i));
    out.y.push_back(data.y.at(i));
  }
  return out;
}

LabeledDataset drop_covariates(const LabeledDataset& data) {
  LabeledDataset out = data;
  out.u.reset();
  return out;
}

} // namespace tcatch
