#include "tcatch/pipeline.hpp"

#include <stdexcept>

#include "tcatch/classifier.hpp"

namespace tcatch {

CatchFit fit_catch(const LabeledDataset& data, const CatchConfig& config) {
  CatchFit fit;
  fit.base = estimate_model(data, config.estimation);
  fit.inputs = solver_inputs(fit.base);
  fit.num_observations = data.size();
  fit.path = fit_path(fit.inputs, config.solver, fit.num_observations);
  return fit;
}

CatchModel model_at(const CatchFit& fit, std::size_t index) {
  if (index >= fit.path.points.size()) throw std::out_of_range("path index out of range");
  return with_coefficients(fit.base, fit.path.points[index].beta);
}

} // namespace tcatch
