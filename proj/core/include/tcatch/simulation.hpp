#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcatch/dataset.hpp"
#include "tcatch/errors.hpp"
#include "tcatch/estimation.hpp"
#include "tcatch/rng.hpp"
#include "tcatch/tensor.hpp"

namespace tcatch {

class UnknownModelError : public Error {
public:
  using Error::Error;
};

enum class CovKind { identity, ar, cs };

struct CovSpec {
  CovKind kind = CovKind::identity;
  double rho = 0.0;
  std::size_t size = 1;
};

/// identity, AR(rho) with entries rho^|i-j|, or CS(rho) with off-diagonal rho.
/// Throws std::invalid_argument when the parameter gives a non-PD matrix.
Matrix make_cov(const CovSpec& spec);

/// Symmetric square root via eigendecomposition. Throws NumericalError unless PD.
Matrix sym_sqrt(const Matrix& sigma);

/// Entries over the cartesian product of 1-based index lists, one list per
/// mode, all set to `value`.
struct Placement {
  std::vector<std::vector<std::size_t>> index_sets;
  double value = 0.0;
};

struct SimulationSpec {
  std::string name;
  TensorShape shape;
  std::vector<std::size_t> class_sizes;
  std::vector<std::size_t> validation_sizes;  // empty: same as class_sizes
  std::vector<CovSpec> covariances;
  std::vector<std::vector<Placement>> coefficients;  // B_2..B_K
  std::size_t num_covariates = 0;
  std::vector<Vector> phi;  // K covariate means
  Matrix psi;               // q x q covariate covariance
  std::vector<Placement> alpha_star;  // over (p_1, ..., p_M, q)
  std::size_t test_size = 10000;

  int num_classes() const { return static_cast<int>(class_sizes.size()); }
};

std::vector<std::string> catalog_names();
/// Throws UnknownModelError listing the catalog for unknown names.
SimulationSpec catalog_spec(const std::string& name);

/// The 2 x 2, q = 1 toy model: mu_2 has 2 at (1,1), alpha has `alpha` at
/// (1,1) and (2,1), identity covariances, U ~ N(0, 1) in both classes.
SimulationSpec example1_spec(double alpha);

/// key = value text; see README for the keys. `base` starts from a catalog
/// entry, later keys override it.
SimulationSpec parse_spec(std::istream& in);
SimulationSpec load_spec(const std::filesystem::path& path);
/// Catalog name, or a path to a spec file.
SimulationSpec resolve_spec(const std::string& name_or_path);

/// Every parameter the generator needs, derived from a spec.
struct TrueParameters {
  TensorShape shape;
  std::vector<Matrix> sigmas;
  std::vector<Matrix> roots;
  std::vector<bool> identity_mode;
  std::vector<DenseTensor> coefficients;  // B_2..B_K
  std::vector<DenseTensor> mu;            // mu_1 = 0, mu_k = [[B_k; Sigma_1..Sigma_M]]
  std::optional<DenseTensor> alpha;       // (p_1..p_M, q)
  std::vector<Vector> phi;
  Matrix psi;
  Matrix psi_root;
  std::vector<double> priors;       // n_k / n
  std::vector<std::size_t> support;  // 0-based positions where some B_k != 0

  std::size_t num_covariates() const { return static_cast<std::size_t>(psi.rows()); }
  int num_classes() const { return static_cast<int>(priors.size()); }
};

TrueParameters true_parameters(const SimulationSpec& spec);

/// Classifier built from the true parameters (the Bayes rule).
CatchModel bayes_model(const TrueParameters& truth);

/// `count` draws of mean + [[Z; Sigma_1^{1/2}, ..., Sigma_M^{1/2}]], stacked
/// along a new last mode.
DenseTensor sample_tn(const DenseTensor& mean, const std::vector<Matrix>& sigmas,
                      std::size_t count, std::uint64_t seed);

/// Observations with the given labels drawn from the generative model.
LabeledDataset draw_observations(const TrueParameters& truth, const std::vector<int>& labels,
                                 Rng& rng);

/// The test set as independently seeded chunks, so it never has to sit in
/// memory at once. Labels are drawn from the priors.
class TestStream {
public:
  TestStream(const TrueParameters& truth, std::size_t size, std::uint64_t seed,
             std::uint64_t replicate, std::size_t chunk_size = 500);

  std::size_t size() const { return size_; }
  std::size_t num_chunks() const;
  LabeledDataset chunk(std::size_t index) const;
  /// Whole test set as one dataset.
  LabeledDataset materialize() const;

private:
  const TrueParameters* truth_;
  std::size_t size_;
  std::uint64_t seed_;
  std::uint64_t replicate_;
  std::size_t chunk_size_;
};

struct GeneratedReplicate {
  LabeledDataset train;
  LabeledDataset validation;
  TestStream test;
};

/// Training and validation sets with fixed class sizes, ordered by class,
/// plus the test stream. Identical (seed, replicate) gives identical data.
GeneratedReplicate generate(const SimulationSpec& spec, const TrueParameters& truth,
                            std::uint64_t seed, std::uint64_t replicate);

/// Misclassification rate of `labeler` over every chunk of `test`.
double stream_error(const TestStream& test,
                    const std::function<std::vector<int>(const LabeledDataset&)>& labeler);

/// Error of the true-parameter rule on the test stream.
double bayes_rule_error(const TrueParameters& truth, const TestStream& test);

struct Example1Rates {
  double r_u = 0.5;
  double r_x11_u = 0.0;
  double r_x11 = 0.0;
  double r_x = 0.0;
};

/// Closed-form best error rates of the toy model.
Example1Rates example1_rates(double alpha);

/// 1 - Phi(z).
double normal_upper_tail(double z);

} // namespace tcatch
