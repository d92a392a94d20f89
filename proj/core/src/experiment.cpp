#include "tcatch/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <stdexcept>
#include <thread>

#include "tcatch/classifier.hpp"
#include "tcatch/errors.hpp"
#include "tcatch/tuning.hpp"

namespace tcatch {

namespace {

using Labeler = std::function<std::vector<int>(const LabeledDataset&)>;

struct Prepared {
  Labeler labeler;
  ReplicateOutcome outcome;
};

Prepared prepare_catch(const LabeledDataset& train, const LabeledDataset& validation,
                       const TrueParameters& truth, const CatchConfig& base, bool use_covariates) {
  CatchConfig config = base;
  config.estimation.use_covariates = use_covariates && train.has_covariates();
  const bool with_u = config.estimation.use_covariates;

  const CatchFit fit = fit_catch(train, config);
  Prepared out;
  for (const auto& point : fit.path.points) {
    ++out.outcome.fits;
    out.outcome.all_converged = out.outcome.all_converged && point.converged;
    out.outcome.all_monotone = out.outcome.all_monotone && point.monotone;
    out.outcome.max_kkt = std::max(out.outcome.max_kkt, point.kkt_violation);
  }
  std::vector<double> errors;
  if (with_u) {
    errors = path_errors(fit, validation);
  } else {
    errors = path_errors(fit, drop_covariates(validation));
  }
  const std::size_t chosen = select_index(errors);
  const auto& point = fit.path.points[chosen];
  out.outcome.lambda = point.lambda;
  const auto metrics = selection_metrics(point.selected, truth.support, truth.shape.size());
  out.outcome.tpr = metrics.tpr;
  out.outcome.fpr = metrics.fpr;

  auto scorer = std::make_shared<BatchScorer>(model_at(fit, chosen));
  out.labeler = [scorer, with_u](const LabeledDataset& d) {
    return scorer->labels(d.x, with_u ? d.u : std::nullopt);
  };
  return out;
}

Prepared prepare(Method method, const GeneratedReplicate& data, const TrueParameters& truth,
                 const CatchConfig& config) {
  switch (method) {
  case Method::catch_xu:
    return prepare_catch(data.train, data.validation, truth, config, true);
  case Method::catch_x:
    return prepare_catch(data.train, data.validation, truth, config, false);
  case Method::bayes: {
    auto scorer = std::make_shared<BatchScorer>(bayes_model(truth));
    return {[scorer](const LabeledDataset& d) { return scorer->labels(d.x, d.u); }, {}};
  }
  case Method::tensor_oracle: {
    const bool with_u = data.train.has_covariates();
    auto scorer = std::make_shared<BatchScorer>(tensor_oracle_model(data.train, truth.support, with_u));
    return {[scorer](const LabeledDataset& d) { return scorer->labels(d.x, d.u); }, {}};
  }
  case Method::vector_oracle: {
    auto oracle = std::make_shared<VectorOracle>(data.train, truth.support, data.train.has_covariates());
    return {[oracle](const LabeledDataset& d) { return oracle->labels(d); }, {}};
  }
  }
  throw std::invalid_argument("unknown method");
}

std::vector<ReplicateOutcome> run_replicate(const SimulationSpec& spec, const TrueParameters& truth,
                                            const ExperimentConfig& config, std::size_t replicate) {
  const GeneratedReplicate data = generate(spec, truth, config.seed, replicate);
  std::vector<Prepared> prepared;
  for (Method m : config.methods) prepared.push_back(prepare(m, data, truth, config.catch_config));

  std::vector<std::size_t> wrong(prepared.size(), 0);
  for (std::size_t c = 0; c < data.test.num_chunks(); ++c) {
    const LabeledDataset part = data.test.chunk(c);
    for (std::size_t m = 0; m < prepared.size(); ++m) {
      const auto predicted = prepared[m].labeler(part);
      for (std::size_t i = 0; i < part.size(); ++i) wrong[m] += predicted[i] != part.y[i];
    }
  }
  std::vector<ReplicateOutcome> out;
  for (std::size_t m = 0; m < prepared.size(); ++m) {
    ReplicateOutcome o = prepared[m].outcome;
    o.error = data.test.size() == 0
                  ? 0.0
                  : static_cast<double>(wrong[m]) / static_cast<double>(data.test.size());
    out.push_back(o);
  }
  return out;
}

} // namespace

std::string method_name(Method method) {
  switch (method) {
  case Method::catch_xu: return "catch";
  case Method::catch_x: return "catch_x";
  case Method::bayes: return "bayes";
  case Method::tensor_oracle: return "tensor_oracle";
  case Method::vector_oracle: return "vector_oracle";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::catch_xu, Method::catch_x, Method::bayes, Method::tensor_oracle,
                   Method::vector_oracle})
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name +
                              "'; expected catch, catch_x, bayes, tensor_oracle or vector_oracle");
}

ExperimentResult run_experiments(const SimulationSpec& spec, const ExperimentConfig& config) {
  if (config.methods.empty()) throw std::invalid_argument("no methods requested");
  if (config.replicates == 0) throw std::invalid_argument("need at least one replicate");
  const TrueParameters truth = true_parameters(spec);

  std::vector<std::vector<ReplicateOutcome>> per_replicate(config.replicates);
  std::vector<std::exception_ptr> failures(config.replicates);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t r = next++; r < config.replicates; r = next++) {
      try {
        per_replicate[r] = run_replicate(spec, truth, config, r);
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, config.replicates));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  ExperimentResult result;
  result.model = spec.name;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    MethodSummary s;
    s.method = config.methods[m];
    s.replicates = config.replicates;
    double tpr = 0, fpr = 0;
    bool has_selection = true;
    for (const auto& rep : per_replicate) {
      const ReplicateOutcome& o = rep[m];
      s.outcomes.push_back(o);
      s.mean_error += o.error;
      s.fits += o.fits;
      s.all_converged = s.all_converged && o.all_converged;
      s.all_monotone = s.all_monotone && o.all_monotone;
      s.max_kkt = std::max(s.max_kkt, o.max_kkt);
      if (o.tpr && o.fpr) {
        tpr += *o.tpr;
        fpr += *o.fpr;
      } else {
        has_selection = false;
      }
    }
    const auto r = static_cast<double>(config.replicates);
    s.mean_error /= r;
    if (config.replicates > 1) {
      double ss = 0;
      for (const auto& o : s.outcomes) ss += (o.error - s.mean_error) * (o.error - s.mean_error);
      s.se_error = std::sqrt(ss / (r - 1)) / std::sqrt(r);
    }
    if (has_selection) {
      s.mean_tpr = tpr / r;
      s.mean_fpr = fpr / r;
    }
    result.methods.push_back(std::move(s));
  }
  return result;
}

MethodSummary run_experiment(const SimulationSpec& spec, Method method, std::size_t replicates,
                             std::uint64_t seed, const CatchConfig& catch_config) {
  ExperimentConfig config;
  config.methods = {method};
  config.replicates = replicates;
  config.seed = seed;
  config.catch_config = catch_config;
  return run_experiments(spec, config).methods.front();
}

CatchModel tensor_oracle_model(const LabeledDataset& train, const std::vector<std::size_t>& support,
                               bool use_covariates) {
  EstimationOptions options;
  options.use_covariates = use_covariates;
  const CatchModel model = estimate_model(train, options);
  const SolverInputs inputs = solver_inputs(model);
  const auto d = static_cast<Eigen::Index>(support.size());
  const std::size_t order = inputs.shape.order();
  std::vector<std::size_t> coords(support.size() * order);
  for (std::size_t a = 0; a < support.size(); ++a)
    unravel(support[a], inputs.shape, std::span<std::size_t>(coords.data() + a * order, order));
  Matrix sigma_dd(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      double w = 1.0;
      for (std::size_t m = 0; m < order; ++m)
        w *= inputs.sigmas[m](static_cast<Eigen::Index>(coords[static_cast<std::size_t>(a) * order + m]),
                              static_cast<Eigen::Index>(coords[static_cast<std::size_t>(b) * order + m]));
      sigma_dd(a, b) = w;
    }
  Matrix delta_d(d, inputs.delta.rows());
  for (Eigen::Index a = 0; a < d; ++a)
    delta_d.row(a) = inputs.delta.col(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)])).transpose();
  const Eigen::LDLT<Matrix> ldlt(sigma_dd);
  if (ldlt.info() != Eigen::Success) throw NumericalError("oracle covariance is singular");
  const Matrix beta_d = ldlt.solve(delta_d);
  Matrix beta = Matrix::Zero(inputs.delta.rows(), inputs.delta.cols());
  for (Eigen::Index a = 0; a < d; ++a)
    beta.col(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)])) = beta_d.row(a).transpose();
  return with_coefficients(model, beta);
}

VectorOracle::VectorOracle(const LabeledDataset& train, const std::vector<std::size_t>& support,
                           bool use_covariates)
    : support_(support), use_covariates_(use_covariates && train.has_covariates()) {
  validate(train, true);
  const Matrix z = features(train);
  const int K = train.num_classes;
  const auto n = static_cast<double>(train.size());
  const auto counts = class_counts(train.y, K);
  Matrix means = Matrix::Zero(z.cols(), K);
  for (std::size_t i = 0; i < train.size(); ++i)
    means.col(train.y[i] - 1) += z.row(static_cast<Eigen::Index>(i)).transpose();
  for (int k = 0; k < K; ++k) means.col(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  Matrix centered = z;
  for (std::size_t i = 0; i < train.size(); ++i)
    centered.row(static_cast<Eigen::Index>(i)) -= means.col(train.y[i] - 1).transpose();
  if (!(n - K > 0)) throw DataError("vector oracle needs more observations than classes");
  const Matrix pooled = centered.transpose() * centered / (n - K);
  const Eigen::LDLT<Matrix> ldlt(pooled);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0))
    throw NumericalError("vector oracle pooled covariance is singular");
  weights_ = ldlt.solve(means);
  offsets_.resize(K);
  for (int k = 0; k < K; ++k)
    offsets_(k) = std::log(static_cast<double>(counts[static_cast<std::size_t>(k)]) / n) -
                  0.5 * means.col(k).dot(weights_.col(k));
}

Matrix VectorOracle::features(const LabeledDataset& data) const {
  const std::size_t p = data.observation_shape().size();
  const std::size_t q = use_covariates_ ? data.num_covariates() : 0;
  Matrix z(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(support_.size() + q));
  const auto x = data.x.as_matrix(p, data.size());
  for (std::size_t a = 0; a < support_.size(); ++a)
    z.col(static_cast<Eigen::Index>(a)) = x.row(static_cast<Eigen::Index>(support_[a])).transpose();
  if (q > 0) z.rightCols(static_cast<Eigen::Index>(q)) = *data.u;
  return z;
}

std::vector<int> VectorOracle::labels(const LabeledDataset& data) const {
  const Matrix scores = (features(data) * weights_).rowwise() + offsets_.transpose();
  std::vector<int> out(data.size());
  std::vector<double> row(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index k = 0; k < scores.cols(); ++k) row[static_cast<std::size_t>(k)] = scores(i, k);
    out[static_cast<std::size_t>(i)] = argmax_label(row);
  }
  return out;
}

} // namespace tcatch
