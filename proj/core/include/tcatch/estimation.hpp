#pragma once

#include <optional>
#include <vector>

#include "tcatch/dataset.hpp"
#include "tcatch/tensor.hpp"

namespace tcatch {

/// LDA parameters of the covariates: class means, pooled covariance and
/// discriminant directions (gamma[0] is identically zero).
struct CovariateBlock {
  std::vector<Vector> phi;
  Matrix psi;
  std::vector<Vector> gamma;
};

/// Every fitted parameter of the classifier.
///
/// `coefficients` holds B_2..B_K (K - 1 tensors); `intercepts` holds a_1..a_K
/// with a_1 = 0. Both are empty until the penalized step has run.
struct CatchModel {
  std::vector<double> priors;
  std::optional<CovariateBlock> covariates;
  std::optional<DenseTensor> alpha;  // shape (p_1, ..., p_M, q)
  std::vector<DenseTensor> mu;
  std::vector<Matrix> sigmas;
  std::vector<DenseTensor> coefficients;
  std::vector<double> intercepts;

  int num_classes() const { return static_cast<int>(priors.size()); }
  const TensorShape& shape() const { return mu.front().shape(); }
  bool has_covariates() const { return covariates.has_value(); }
};

struct EstimationOptions {
  /// Ignore covariates even when the dataset has them (plain tensor model).
  bool use_covariates = true;
  /// Ridge added to a mode covariance that fails the positive-definiteness
  /// condition, as a multiple of that matrix's mean diagonal.
  double pd_gamma_scale = 1e-4;
  /// Add the ridge to every mode regardless of the condition.
  bool always_perturb = false;
};

/// pi_k = n_k / n. Throws DataError when a class is empty.
std::vector<double> estimate_priors(const std::vector<int>& y, int num_classes);

/// Class means phi_k, pooled MLE covariance Psi (divisor n) and
/// gamma_k = Psi^{-1} (phi_k - phi_1). Throws NumericalError when Psi is singular.
CovariateBlock estimate_covariate_block(const Matrix& u, const std::vector<int>& y,
                                        int num_classes);

/// Within-class sample means of the stacked tensor, one per class.
std::vector<DenseTensor> class_means(const LabeledDataset& data);

/// Covariate effect alpha = X~ x_{M+1} {(U~ U~^T)^{-1} U~} using within-class
/// centred tensors X~ and covariates U~ (q x n). Requires covariates.
DenseTensor estimate_alpha(const LabeledDataset& data);

/// mu_k = Xbar_k - alpha xbar_{M+1} Ubar_k; plain class means without alpha.
std::vector<DenseTensor> estimate_mu(const LabeledDataset& data,
                                     const std::optional<DenseTensor>& alpha);

/// Stacked residuals E^i = (X^i - Xbar_k) - alpha xbar_{M+1} (U^i - Ubar_k).
DenseTensor residuals(const LabeledDataset& data, const std::optional<DenseTensor>& alpha);

/// Pooled within-class variance (divisor n) of residual entry (1, ..., 1).
double reference_variance(const DenseTensor& stacked_residuals);

/// Unscaled mode covariances S~_j = (n prod_{l != j} p_l)^{-1} sum_i E^i_(j) E^i_(j)^T.
std::vector<Matrix> mode_scatter(const DenseTensor& stacked_residuals);

/// Scaled mode covariances: Sigma_j = S~_j / s~_{j,11} for j < M and
/// Sigma_M = var / prod_j s~_{j,11} * S~_M.
std::vector<Matrix> estimate_sigmas(const DenseTensor& stacked_residuals,
                                    double reference_variance);

/// Per mode j: (n - K) prod_{m != j} p_m > p_j.
std::vector<bool> check_pd_condition(std::size_t n, int num_classes, const TensorShape& shape);

/// sigma + gamma I. Throws std::invalid_argument for gamma <= 0.
Matrix perturb_sigma(const Matrix& sigma, double gamma);

/// Everything except the penalized coefficients and intercepts.
CatchModel estimate_model(const LabeledDataset& data, const EstimationOptions& options = {});

/// vec(mu_k - mu_1) for k = 2..K as the rows of a (K - 1) x p matrix.
Matrix mean_differences(const CatchModel& model);

} // namespace tcatch
