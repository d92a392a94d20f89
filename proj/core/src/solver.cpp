#include "tcatch/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tcatch/errors.hpp"

namespace tcatch {

namespace {

void check_inputs(const SolverInputs& in) {
  if (in.sigmas.size() != in.shape.order())
    throw DimensionError("solver: need one covariance per tensor mode");
  for (std::size_t m = 0; m < in.sigmas.size(); ++m)
    if (static_cast<std::size_t>(in.sigmas[m].rows()) != in.shape[m] ||
        static_cast<std::size_t>(in.sigmas[m].cols()) != in.shape[m])
      throw DimensionError("solver: covariance " + std::to_string(m + 1) +
                           " does not match mode extent");
  if (static_cast<std::size_t>(in.delta.cols()) != in.shape.size())
    throw DimensionError("solver: mean contrasts do not match tensor size");
  if (in.delta.rows() < 1) throw DimensionError("solver: need at least two classes");
}

// Sigma_M x ... x Sigma_1 applied to each row of `beta`, via Tucker products.
Matrix kronecker_times(const Matrix& beta, const SolverInputs& in) {
  Matrix out(beta.rows(), beta.cols());
  DenseTensor b(in.shape);
  for (Eigen::Index k = 0; k < beta.rows(); ++k) {
    b.as_vector() = beta.row(k).transpose();
    out.row(k) = tucker(b, in.sigmas).as_vector().transpose();
  }
  return out;
}

double group_penalty(const Matrix& beta) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < beta.cols(); ++j) total += beta.col(j).norm();
  return total;
}

// Coordinate-descent state for one lambda. `gradient_` caches
// (Sigma_M x ... x Sigma_1) beta_k for every contrast; the full Kronecker
// matrix is never formed, only one of its columns at a time.
class CoordinateDescent {
public:
  CoordinateDescent(const SolverInputs& in, double lambda, Matrix beta)
      : in_(in),
        lambda_(lambda),
        order_(in.shape.order()),
        beta_(std::move(beta)),
        diagonal_(kronecker_diagonal(in.sigmas, in.shape)),
        column_(static_cast<Eigen::Index>(in.shape.size())),
        coords_(in.shape.order()) {
    for (Eigen::Index j = 0; j < diagonal_.size(); ++j)
      if (!(diagonal_(j) > 0))
        throw NumericalError("solver: nonpositive covariance diagonal at position " +
                             std::to_string(j + 1));
    refresh_gradient();
  }

  SingleFit run(const SolverConfig& config) {
    SingleFit fit;
    fit.lambda = lambda_;
    double previous = objective();
    const auto record = [&](double value) {
      const double slack = 1e-12 * std::max(1.0, std::abs(previous));
      if (value > previous + slack) fit.monotone = false;
      previous = value;
      if (config.record_trace) fit.trace.push_back(value);
    };

    std::size_t full_sweeps = 0;
    while (full_sweeps < config.max_sweeps) {
      const double change = full_sweep();
      ++full_sweeps;
      ++fit.sweeps;
      record(objective());
      refresh_gradient();
      if (change <= config.tol) {
        fit.kkt_violation = kkt();
        if (fit.kkt_violation <= config.kkt_tol) {
          fit.converged = true;
          break;
        }
      }
      collect_active();
      if (active_.empty()) continue;
      for (std::size_t pass = 0; pass < config.max_sweeps; ++pass) {
        const double active_change = active_sweep();
        ++fit.sweeps;
        record(objective());
        if (active_change <= 0.1 * config.tol) break;
      }
      refresh_gradient();
    }
    if (!fit.converged) fit.kkt_violation = kkt();
    fit.objective = objective();
    fit.beta = std::move(beta_);
    return fit;
  }

private:
  // Minimizes the block subproblem at `j` exactly and returns the new group.
  Vector block_update(Eigen::Index j) const {
    const double s = diagonal_(j);
    const Vector target = (in_.delta.col(j) - gradient_.col(j) + s * beta_.col(j)) / s;
    return group_soft_threshold(target, lambda_ / (2.0 * s));
  }

  // Fills column_ with column j of the Kronecker covariance.
  void kronecker_column(std::size_t j) {
    unravel(j, in_.shape, coords_);
    Eigen::Index length = 1;
    column_(0) = 1.0;
    for (std::size_t m = 0; m < order_; ++m) {
      const Matrix& sigma = in_.sigmas[m];
      const auto pm = sigma.rows();
      const auto jm = static_cast<Eigen::Index>(coords_[m]);
      for (Eigen::Index a = pm - 1; a >= 0; --a) {
        const double w = sigma(a, jm);
        for (Eigen::Index i = length - 1; i >= 0; --i) column_(a * length + i) = w * column_(i);
      }
      length *= pm;
    }
  }

  double full_sweep() {
    double max_change = 0.0;
    const auto p = static_cast<Eigen::Index>(in_.shape.size());
    for (Eigen::Index j = 0; j < p; ++j) {
      const Vector updated = block_update(j);
      const Vector step = updated - beta_.col(j);
      const double change = step.cwiseAbs().maxCoeff();
      if (change == 0.0) continue;
      max_change = std::max(max_change, change);
      beta_.col(j) = updated;
      kronecker_column(static_cast<std::size_t>(j));
      gradient_.noalias() += step * column_.transpose();
    }
    return max_change;
  }

  void collect_active() {
    active_.clear();
    for (Eigen::Index j = 0; j < beta_.cols(); ++j)
      if (beta_.col(j).squaredNorm() > 0) active_.push_back(static_cast<std::size_t>(j));
    active_coords_.resize(active_.size() * order_);
    for (std::size_t a = 0; a < active_.size(); ++a)
      unravel(active_[a], in_.shape,
              std::span<std::size_t>(active_coords_.data() + a * order_, order_));
  }

  // Cycles over the active groups only; the gradient is kept exact on
  // active positions and goes stale elsewhere until the next refresh.
  double active_sweep() {
    double max_change = 0.0;
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const auto j = static_cast<Eigen::Index>(active_[a]);
      const Vector updated = block_update(j);
      const Vector step = updated - beta_.col(j);
      const double change = step.cwiseAbs().maxCoeff();
      if (change == 0.0) continue;
      max_change = std::max(max_change, change);
      beta_.col(j) = updated;
      const std::size_t* cj = active_coords_.data() + a * order_;
      for (std::size_t b = 0; b < active_.size(); ++b) {
        const std::size_t* cb = active_coords_.data() + b * order_;
        double w = 1.0;
        for (std::size_t m = 0; m < order_; ++m)
          w *= in_.sigmas[m](static_cast<Eigen::Index>(cb[m]), static_cast<Eigen::Index>(cj[m]));
        gradient_.col(static_cast<Eigen::Index>(active_[b])) += w * step;
      }
    }
    return max_change;
  }

  void refresh_gradient() {
    if (beta_.isZero(0.0)) {
      gradient_.setZero(beta_.rows(), beta_.cols());
      return;
    }
    gradient_ = kronecker_times(beta_, in_);
  }

  // Exact on nonzero groups, which are the only ones contributing.
  double objective() const {
    double value = 0.0;
    for (Eigen::Index j = 0; j < beta_.cols(); ++j) {
      const auto b = beta_.col(j);
      if (b.squaredNorm() == 0) continue;
      value += b.dot(gradient_.col(j) - 2.0 * in_.delta.col(j)) + lambda_ * b.norm();
    }
    return value;
  }

  double kkt() const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta_.cols(); ++j) {
      const Vector g = 2.0 * (gradient_.col(j) - in_.delta.col(j));
      const double norm = beta_.col(j).norm();
      if (norm > 0) {
        worst = std::max(worst, (g + lambda_ * beta_.col(j) / norm).cwiseAbs().maxCoeff());
      } else {
        worst = std::max(worst, g.norm() - lambda_);
      }
    }
    return std::max(worst, 0.0);
  }

  const SolverInputs& in_;
  double lambda_;
  std::size_t order_;
  Matrix beta_;
  Matrix gradient_;
  Vector diagonal_;
  Vector column_;
  std::vector<std::size_t> coords_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> active_coords_;
};

} // namespace

SolverInputs solver_inputs(const CatchModel& model) {
  SolverInputs in{model.shape(), model.sigmas, mean_differences(model)};
  check_inputs(in);
  return in;
}

Vector group_soft_threshold(const Vector& beta_tilde, double threshold) {
  if (threshold < 0) throw std::invalid_argument("soft threshold must be nonnegative");
  const double norm = beta_tilde.norm();
  if (norm <= threshold || norm == 0.0) return Vector::Zero(beta_tilde.size());
  return beta_tilde * (1.0 - threshold / norm);
}

Vector kronecker_diagonal(const std::vector<Matrix>& sigmas, const TensorShape& shape) {
  Vector diag(static_cast<Eigen::Index>(shape.size()));
  std::vector<std::size_t> coords(shape.order());
  for (std::size_t j = 0; j < shape.size(); ++j) {
    unravel(j, shape, coords);
    double d = 1.0;
    for (std::size_t m = 0; m < shape.order(); ++m) {
      const auto c = static_cast<Eigen::Index>(coords[m]);
      d *= sigmas[m](c, c);
    }
    diag(static_cast<Eigen::Index>(j)) = d;
  }
  return diag;
}

Vector partial_residual_score(std::size_t position, const Matrix& beta,
                              const SolverInputs& inputs) {
  check_inputs(inputs);
  const std::size_t order = inputs.shape.order();
  if (position >= inputs.shape.size()) throw DimensionError("position out of range");
  if (beta.rows() != inputs.delta.rows() || beta.cols() != inputs.delta.cols())
    throw DimensionError("coefficient matrix does not match inputs");
  std::vector<std::size_t> target(order), other(order);
  unravel(position, inputs.shape, target);

  double sigma_jj = 1.0;
  for (std::size_t m = 0; m < order; ++m) {
    const auto c = static_cast<Eigen::Index>(target[m]);
    sigma_jj *= inputs.sigmas[m](c, c);
  }
  if (!(sigma_jj > 0)) throw NumericalError("zero covariance diagonal at position");

  const auto j = static_cast<Eigen::Index>(position);
  Vector contraction = Vector::Zero(beta.rows());
  for (Eigen::Index jp = 0; jp < beta.cols(); ++jp) {
    if (jp == j || beta.col(jp).squaredNorm() == 0) continue;
    unravel(static_cast<std::size_t>(jp), inputs.shape, other);
    double w = 1.0;
    for (std::size_t m = 0; m < order; ++m)
      w *= inputs.sigmas[m](static_cast<Eigen::Index>(other[m]),
                            static_cast<Eigen::Index>(target[m]));
    contraction += w * beta.col(jp);
  }
  return (inputs.delta.col(j) - contraction) / sigma_jj;
}

double evaluate_objective(const Matrix& beta, const SolverInputs& inputs, double lambda) {
  check_inputs(inputs);
  if (beta.rows() != inputs.delta.rows() || beta.cols() != inputs.delta.cols())
    throw DimensionError("coefficient matrix does not match inputs");
  const Matrix quad = kronecker_times(beta, inputs);
  double value = 0.0;
  for (Eigen::Index k = 0; k < beta.rows(); ++k)
    value += beta.row(k).dot(quad.row(k)) - 2.0 * inputs.delta.row(k).dot(beta.row(k));
  return value + lambda * group_penalty(beta);
}

double kkt_violation(const Matrix& beta, const SolverInputs& inputs, double lambda) {
  check_inputs(inputs);
  const Matrix gradient = 2.0 * (kronecker_times(beta, inputs) - inputs.delta);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.cols(); ++j) {
    const double norm = beta.col(j).norm();
    if (norm > 0)
      worst = std::max(worst,
                       (gradient.col(j) + lambda * beta.col(j) / norm).cwiseAbs().maxCoeff());
    else
      worst = std::max(worst, gradient.col(j).norm() - lambda);
  }
  return std::max(worst, 0.0);
}

double lambda_max(const SolverInputs& inputs) {
  check_inputs(inputs);
  return 2.0 * inputs.delta.colwise().norm().maxCoeff();
}

std::vector<double> lambda_grid(const SolverInputs& inputs, const SolverConfig& config,
                                std::size_t num_observations) {
  if (!config.lambdas.empty()) {
    for (std::size_t i = 0; i < config.lambdas.size(); ++i) {
      if (!(config.lambdas[i] > 0)) throw std::invalid_argument("lambda values must be positive");
      if (i > 0 && !(config.lambdas[i] < config.lambdas[i - 1]))
        throw std::invalid_argument("lambda path must be strictly decreasing");
    }
    return config.lambdas;
  }
  if (config.num_lambdas == 0) throw std::invalid_argument("lambda path needs at least one value");
  const double top = lambda_max(inputs);
  const double ratio = config.lambda_min_ratio.value_or(
      num_observations > inputs.shape.size() ? 0.01 : 0.05);
  if (!(ratio > 0 && ratio < 1)) throw std::invalid_argument("lambda_min_ratio must be in (0, 1)");
  std::vector<double> grid(config.num_lambdas);
  if (config.num_lambdas == 1 || !(top > 0)) {
    std::fill(grid.begin(), grid.end(), top);
    grid.resize(1);
    return grid;
  }
  const double step = std::log(ratio) / static_cast<double>(config.num_lambdas - 1);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = top * std::exp(step * static_cast<double>(i));
  grid.front() = top;
  return grid;
}

SingleFit fit_single(double lambda, const Matrix* warm_start, const SolverInputs& inputs,
                     const SolverConfig& config) {
  check_inputs(inputs);
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  if (!(config.tol > 0)) throw std::invalid_argument("tolerance must be positive");
  Matrix start = Matrix::Zero(inputs.delta.rows(), inputs.delta.cols());
  if (warm_start) {
    if (warm_start->rows() != start.rows() || warm_start->cols() != start.cols())
      throw DimensionError("warm start does not match problem size");
    start = *warm_start;
  }
  CoordinateDescent solver(inputs, lambda, std::move(start));
  return solver.run(config);
}

FitPath fit_path(const SolverInputs& inputs, const SolverConfig& config,
                 std::size_t num_observations) {
  FitPath path;
  const Matrix* warm = nullptr;
  const std::size_t limit = config.max_selected.value_or(num_observations);
  for (double lambda : lambda_grid(inputs, config, num_observations)) {
    SingleFit fit = fit_single(lambda, warm, inputs, config);
    auto selected = selected_positions(fit.beta);
    if (!path.points.empty() && selected.size() > limit) break;
    PathPoint point;
    point.lambda = lambda;
    point.selected = std::move(selected);
    point.objective = fit.objective;
    point.sweeps = fit.sweeps;
    point.converged = fit.converged;
    point.kkt_violation = fit.kkt_violation;
    point.monotone = fit.monotone;
    point.trace = std::move(fit.trace);
    point.beta = std::move(fit.beta);
    path.points.push_back(std::move(point));
    warm = &path.points.back().beta;
  }
  return path;
}

std::size_t solver_workspace_scalars(const TensorShape& shape, std::size_t num_contrasts) {
  const std::size_t p = shape.size();
  // beta, gradient, diagonal, Kronecker column, and Tucker intermediates
  // (at most two tensors of size p alive at once per refresh).
  return 2 * num_contrasts * p + 2 * p + 2 * p + 2 * shape.order();
}

std::vector<std::size_t> selected_positions(const Matrix& beta) {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < beta.cols(); ++j)
    if (beta.col(j).squaredNorm() > 0) out.push_back(static_cast<std::size_t>(j));
  return out;
}

} // namespace tcatch
