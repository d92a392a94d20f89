#pragma once

#include <cstddef>

#include "tcatch/dataset.hpp"
#include "tcatch/estimation.hpp"
#include "tcatch/solver.hpp"

namespace tcatch {

struct CatchConfig {
  EstimationOptions estimation;
  SolverConfig solver;
};

/// Closed-form estimates plus the penalized path fitted on them.
struct CatchFit {
  CatchModel base;  // no coefficients yet
  SolverInputs inputs;
  FitPath path;
  std::size_t num_observations = 0;
};

CatchFit fit_catch(const LabeledDataset& data, const CatchConfig& config = {});

/// Complete classifier using the coefficients of path point `index`.
CatchModel model_at(const CatchFit& fit, std::size_t index);

} // namespace tcatch
