#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tcatch/estimation.hpp"
#include "tcatch/tensor.hpp"

namespace tcatch {

/// Data the penalized problem depends on: the mode covariances and the
/// class mean contrasts delta_k = vec(mu_k - mu_1), k = 2..K, stored as the
/// rows of a (K - 1) x p matrix. Positions below are 0-based vec positions.
struct SolverInputs {
  TensorShape shape;
  std::vector<Matrix> sigmas;
  Matrix delta;

  std::size_t num_positions() const { return shape.size(); }
  std::size_t num_contrasts() const { return static_cast<std::size_t>(delta.rows()); }
};

SolverInputs solver_inputs(const CatchModel& model);

struct SolverConfig {
  /// Explicit, strictly decreasing penalty levels. Empty means automatic.
  std::vector<double> lambdas;
  std::size_t num_lambdas = 50;
  /// Smallest automatic lambda as a fraction of lambda_max. Unset picks 0.05,
  /// or 0.01 when there are more observations than tensor entries.
  std::optional<double> lambda_min_ratio;
  /// The path stops before the first lambda selecting more positions than
  /// this. Unset means the number of observations.
  std::optional<std::size_t> max_selected;
  std::size_t max_sweeps = 200;
  /// Largest absolute coefficient change over a full sweep at convergence.
  double tol = 1e-6;
  /// Largest tolerated KKT residual at convergence.
  double kkt_tol = 1e-6;
  bool record_trace = false;
};

/// Result of minimizing the penalized objective at one lambda.
struct SingleFit {
  double lambda = 0.0;
  Matrix beta;  // (K - 1) x p; column j is the coefficient group of position j
  double objective = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  double kkt_violation = 0.0;
  /// Objective never increased from one sweep to the next.
  bool monotone = true;
  std::vector<double> trace;  // objective after every sweep, if requested
};

struct PathPoint {
  double lambda = 0.0;
  Matrix beta;
  std::vector<std::size_t> selected;  // positions with a nonzero group
  double objective = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  double kkt_violation = 0.0;
  bool monotone = true;
  std::vector<double> trace;
};

struct FitPath {
  std::vector<PathPoint> points;
};

/// beta_tilde * (1 - threshold / ||beta_tilde||)_+.
Vector group_soft_threshold(const Vector& beta_tilde, double threshold);

/// Unpenalized coordinate target for group `position`: for each contrast k,
/// (delta_kj - <<B_k^j; Sigma_1[:, j_1], ..., Sigma_M[:, j_M]>>) / sigma_jj,
/// where B_k^j is B_k with position j zeroed. Evaluated by direct contraction
/// over the nonzero coefficients.
Vector partial_residual_score(std::size_t position, const Matrix& beta,
                              const SolverInputs& inputs);

/// prod_m Sigma_m(j_m, j_m) for every position j.
Vector kronecker_diagonal(const std::vector<Matrix>& sigmas, const TensorShape& shape);

/// sum_k [beta_k' (Sigma_M x ... x Sigma_1) beta_k - 2 delta_k' beta_k]
///   + lambda sum_j ||beta_.j||, through Tucker products.
double evaluate_objective(const Matrix& beta, const SolverInputs& inputs, double lambda);

/// Largest KKT residual of `beta` at `lambda` (0 at an exact minimizer).
double kkt_violation(const Matrix& beta, const SolverInputs& inputs, double lambda);

/// Smallest lambda whose minimizer is identically zero: max_j 2 ||delta_.j||.
double lambda_max(const SolverInputs& inputs);

/// Decreasing geometric grid from lambda_max, or config.lambdas if given.
std::vector<double> lambda_grid(const SolverInputs& inputs, const SolverConfig& config,
                                std::size_t num_observations);

/// Blockwise coordinate descent for one lambda, optionally warm-started.
SingleFit fit_single(double lambda, const Matrix* warm_start, const SolverInputs& inputs,
                     const SolverConfig& config = {});

/// Warm-started fits along the lambda grid, largest lambda first. Always
/// keeps the first point; stops early at the max_selected limit.
FitPath fit_path(const SolverInputs& inputs, const SolverConfig& config,
                 std::size_t num_observations);

/// Scalars held by the coordinate-descent workspace for a problem of this
/// size (coefficients, gradient, diagonal and scratch), excluding inputs.
std::size_t solver_workspace_scalars(const TensorShape& shape, std::size_t num_contrasts);

/// Positions whose coefficient group is nonzero.
std::vector<std::size_t> selected_positions(const Matrix& beta);

} // namespace tcatch
