#include "tcatch/estimation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tcatch/errors.hpp"

namespace tcatch {

namespace {

std::size_t label_index(int label) { return static_cast<std::size_t>(label - 1); }

// Within-class mean rows of u (K x q).
Matrix covariate_class_means(const Matrix& u, const std::vector<int>& y, int num_classes) {
  Matrix means = Matrix::Zero(num_classes, u.cols());
  const auto counts = class_counts(y, num_classes);
  for (std::size_t i = 0; i < y.size(); ++i)
    means.row(y[i] - 1) += u.row(static_cast<Eigen::Index>(i));
  for (int k = 0; k < num_classes; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0)
      throw DataError("class " + std::to_string(k + 1) + " has no observations");
    means.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  return means;
}

// Within-class centred covariates as a q x n matrix.
Matrix centred_covariates(const LabeledDataset& data) {
  const Matrix means = covariate_class_means(*data.u, data.y, data.num_classes);
  Matrix centred = data.u->transpose();
  for (std::size_t i = 0; i < data.y.size(); ++i)
    centred.col(static_cast<Eigen::Index>(i)) -= means.row(data.y[i] - 1).transpose();
  return centred;
}

// Within-class centred tensor data, same stacked shape as data.x.
DenseTensor centred_tensor(const LabeledDataset& data, const std::vector<DenseTensor>& means) {
  DenseTensor out = data.x;
  const std::size_t p = data.observation_shape().size();
  auto stacked = out.as_matrix(p, data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    stacked.col(static_cast<Eigen::Index>(i)) -= means[label_index(data.y[i])].as_vector();
  return out;
}

void require_covariates(const LabeledDataset& data) {
  if (!data.u) throw DataError("dataset has no covariates");
}

} // namespace

std::vector<double> estimate_priors(const std::vector<int>& y, int num_classes) {
  const auto counts = class_counts(y, num_classes);
  std::vector<double> priors(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) throw DataError("class " + std::to_string(k + 1) + " has no observations");
    priors[k] = static_cast<double>(counts[k]) / static_cast<double>(y.size());
  }
  return priors;
}

CovariateBlock estimate_covariate_block(const Matrix& u, const std::vector<int>& y,
                                        int num_classes) {
  if (static_cast<std::size_t>(u.rows()) != y.size())
    throw DataError("covariate rows do not match label count");
  const Matrix means = covariate_class_means(u, y, num_classes);
  const auto q = u.cols();
  Matrix psi = Matrix::Zero(q, q);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Vector d = u.row(static_cast<Eigen::Index>(i)) - means.row(y[i] - 1);
    psi.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  psi = psi.selfadjointView<Eigen::Lower>();
  psi /= static_cast<double>(y.size());

  Eigen::LLT<Matrix> llt(psi);
  const double scale = psi.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || !(scale > 0) ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-8 * std::sqrt(scale))
    throw NumericalError("covariate covariance Psi is singular");

  CovariateBlock block;
  block.psi = psi;
  for (int k = 0; k < num_classes; ++k) {
    block.phi.push_back(means.row(k).transpose());
    block.gamma.push_back(llt.solve(block.phi.back() - block.phi.front()));
  }
  block.gamma.front().setZero();
  return block;
}

std::vector<DenseTensor> class_means(const LabeledDataset& data) {
  const TensorShape shape = data.observation_shape();
  const std::size_t p = shape.size();
  const auto counts = class_counts(data.y, data.num_classes);
  std::vector<DenseTensor> means(static_cast<std::size_t>(data.num_classes), DenseTensor(shape));
  const auto stacked = data.x.as_matrix(p, data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    means[label_index(data.y[i])].as_vector() += stacked.col(static_cast<Eigen::Index>(i));
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (counts[k] == 0) throw DataError("class " + std::to_string(k + 1) + " has no observations");
    means[k].as_vector() /= static_cast<double>(counts[k]);
  }
  return means;
}

DenseTensor estimate_alpha(const LabeledDataset& data) {
  require_covariates(data);
  const Matrix u_centred = centred_covariates(data);  // q x n
  const Matrix gram = u_centred * u_centred.transpose();
  Eigen::LLT<Matrix> llt(gram);
  const double scale = gram.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || !(scale > 0) ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-8 * std::sqrt(scale))
    throw NumericalError("within-class covariate scatter U~ U~^T is singular");
  const Matrix projector = llt.solve(u_centred);  // (U~ U~^T)^{-1} U~, q x n

  const DenseTensor x_centred = centred_tensor(data, class_means(data));
  return mode_product(x_centred, x_centred.order() - 1, projector);
}

std::vector<DenseTensor> estimate_mu(const LabeledDataset& data,
                                     const std::optional<DenseTensor>& alpha) {
  std::vector<DenseTensor> mu = class_means(data);
  if (!alpha) return mu;
  require_covariates(data);
  const TensorShape shape = data.observation_shape();
  if (alpha->shape() != shape.append(data.num_covariates()))
    throw DimensionError("alpha shape does not match dataset");
  const Matrix ubar = covariate_class_means(*data.u, data.y, data.num_classes);
  const auto a = alpha->as_matrix(shape.size(), data.num_covariates());
  for (std::size_t k = 0; k < mu.size(); ++k)
    mu[k].as_vector() -= a * ubar.row(static_cast<Eigen::Index>(k)).transpose();
  return mu;
}

DenseTensor residuals(const LabeledDataset& data, const std::optional<DenseTensor>& alpha) {
  DenseTensor out = centred_tensor(data, class_means(data));
  if (!alpha) return out;
  require_covariates(data);
  const TensorShape shape = data.observation_shape();
  if (alpha->shape() != shape.append(data.num_covariates()))
    throw DimensionError("alpha shape does not match dataset");
  const auto a = alpha->as_matrix(shape.size(), data.num_covariates());
  out.as_matrix(shape.size(), data.size()).noalias() -= a * centred_covariates(data);
  return out;
}

double reference_variance(const DenseTensor& stacked_residuals) {
  const std::size_t last = stacked_residuals.order() - 1;
  const std::size_t n = stacked_residuals.dim(last);
  const std::size_t block = stacked_residuals.shape().stride(last);
  if (n == 0) throw DataError("no residuals");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = stacked_residuals[i * block];
    sum += e * e;
  }
  return sum / static_cast<double>(n);
}

std::vector<Matrix> mode_scatter(const DenseTensor& stacked_residuals) {
  const std::size_t order = stacked_residuals.order() - 1;
  const std::size_t n = stacked_residuals.dim(order);
  const std::size_t total = stacked_residuals.size();
  std::vector<Matrix> out;
  out.reserve(order);
  for (std::size_t j = 0; j < order; ++j) {
    const std::size_t pj = stacked_residuals.dim(j);
    const std::size_t left = stacked_residuals.shape().stride(j);
    const std::size_t right = total / (left * pj);
    Matrix gram = Matrix::Zero(static_cast<Eigen::Index>(pj), static_cast<Eigen::Index>(pj));
    if (left == 1) {
      const auto a = stacked_residuals.as_matrix(pj, right);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
    } else {
      for (std::size_t r = 0; r < right; ++r) {
        Eigen::Map<const Matrix> slab(stacked_residuals.data().data() + r * left * pj,
                                      static_cast<Eigen::Index>(left),
                                      static_cast<Eigen::Index>(pj));
        gram.selfadjointView<Eigen::Lower>().rankUpdate(slab.transpose());
      }
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    gram /= static_cast<double>(n) * static_cast<double>(total / n / pj);
    out.push_back(std::move(gram));
  }
  return out;
}

std::vector<Matrix> estimate_sigmas(const DenseTensor& stacked_residuals,
                                    double reference_variance) {
  std::vector<Matrix> scatter = mode_scatter(stacked_residuals);
  double corner_product = 1.0;
  for (std::size_t j = 0; j < scatter.size(); ++j) {
    const double corner = scatter[j](0, 0);
    if (!(corner > 0))
      throw NumericalError("mode-" + std::to_string(j + 1) +
                           " residual scatter has a zero (1,1) entry");
    corner_product *= corner;
  }
  const std::size_t last = scatter.size() - 1;
  for (std::size_t j = 0; j < last; ++j) {
    const double corner = scatter[j](0, 0);
    scatter[j] /= corner;
  }
  scatter[last] *= reference_variance / corner_product;
  return scatter;
}

std::vector<bool> check_pd_condition(std::size_t n, int num_classes, const TensorShape& shape) {
  std::vector<bool> ok(shape.order());
  const double effective = static_cast<double>(n) - static_cast<double>(num_classes);
  for (std::size_t j = 0; j < shape.order(); ++j) {
    const double others = static_cast<double>(shape.size()) / static_cast<double>(shape[j]);
    ok[j] = effective * others > static_cast<double>(shape[j]);
  }
  return ok;
}

Matrix perturb_sigma(const Matrix& sigma, double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("perturbation gamma must be positive");
  Matrix out = sigma;
  out.diagonal().array() += gamma;
  return out;
}

CatchModel estimate_model(const LabeledDataset& data, const EstimationOptions& options) {
  validate(data, true);
  CatchModel model;
  model.priors = estimate_priors(data.y, data.num_classes);
  const bool with_u = options.use_covariates && data.u.has_value();
  if (with_u) {
    model.covariates = estimate_covariate_block(*data.u, data.y, data.num_classes);
    model.alpha = estimate_alpha(data);
  }
  model.mu = estimate_mu(data, model.alpha);
  const DenseTensor resid = residuals(data, model.alpha);
  model.sigmas = estimate_sigmas(resid, reference_variance(resid));

  const auto pd = check_pd_condition(data.size(), data.num_classes, data.observation_shape());
  for (std::size_t j = 0; j < model.sigmas.size(); ++j) {
    if (pd[j] && !options.always_perturb) continue;
    const double mean_diag = model.sigmas[j].diagonal().mean();
    const double gamma = options.pd_gamma_scale * (mean_diag > 0 ? mean_diag : 1.0);
    model.sigmas[j] = perturb_sigma(model.sigmas[j], gamma);
  }
  return model;
}

Matrix mean_differences(const CatchModel& model) {
  const std::size_t p = model.shape().size();
  const auto K = static_cast<Eigen::Index>(model.mu.size());
  Matrix delta(K - 1, static_cast<Eigen::Index>(p));
  for (Eigen::Index k = 1; k < K; ++k)
    delta.row(k - 1) = (model.mu[static_cast<std::size_t>(k)].as_vector() -
                        model.mu.front().as_vector()).transpose();
  return delta;
}

} // namespace tcatch
