#pragma once

// Brute-force reference implementations. These build dense Kronecker
// matrices and explicit densities on purpose and are only for small shapes.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tcatch/dataset.hpp"
#include "tcatch/estimation.hpp"
#include "tcatch/tensor.hpp"

namespace oracle {

using tcatch::Matrix;
using tcatch::Vector;

/// Sigma_M kron ... kron Sigma_1.
Matrix kronecker(const std::vector<Matrix>& sigmas);

/// Random symmetric positive-definite matrix.
Matrix random_spd(std::size_t p, std::mt19937_64& rng);
Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
tcatch::DenseTensor random_tensor(const tcatch::TensorShape& shape, std::mt19937_64& rng);

/// FISTA on sum_k [b_k' Q b_k - 2 d_k' b_k] + lambda sum_j ||b_.j||, with
/// delta stored as (K-1) x p. Runs until the iterates stop moving.
Matrix group_lasso_qp(const Matrix& q, const Matrix& delta, double lambda);

/// alpha from a separate pooled within-class least-squares fit per entry.
tcatch::DenseTensor per_entry_ols_alpha(const tcatch::LabeledDataset& data);

double mvn_log_density(const Vector& x, const Vector& mean, const Matrix& cov);

/// argmax_k log pi_k + log f(u | k) + log f(x | u, k) with explicit densities
/// and the dense Kronecker covariance.
int brute_force_bayes(const tcatch::CatchModel& truth, const tcatch::DenseTensor& x,
                      const std::optional<Vector>& u);

} // namespace oracle
