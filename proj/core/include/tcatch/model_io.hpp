#pragma once

#include <filesystem>

#include "tcatch/estimation.hpp"

namespace tcatch {

// Model directory:
//   priors.csv, intercepts.csv      one row of K values
//   mu_<k>.ctb (k = 1..K), B_<k>.ctb (k = 2..K), sigma_<m>.csv (m = 1..M)
//   with covariates: phi.csv (K x q), psi.csv (q x q), gamma.csv (K x q), alpha.ctb
void save_model(const std::filesystem::path& dir, const CatchModel& model);
CatchModel load_model(const std::filesystem::path& dir);

} // namespace tcatch
