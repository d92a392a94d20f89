#include "tcatch/model_io.hpp"

#include <string>

#include "tcatch/csv.hpp"
#include "tcatch/ctb.hpp"
#include "tcatch/errors.hpp"

namespace tcatch {

namespace {

namespace fs = std::filesystem;

fs::path numbered(const fs::path& dir, const std::string& stem, std::size_t k, const char* ext) {
  return dir / (stem + "_" + std::to_string(k) + ext);
}

Matrix stack_rows(const std::vector<Vector>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (std::size_t k = 0; k < rows.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
  return m;
}

std::vector<Vector> split_rows(const Matrix& m) {
  std::vector<Vector> rows;
  for (Eigen::Index k = 0; k < m.rows(); ++k) rows.emplace_back(m.row(k).transpose());
  return rows;
}

} // namespace

void save_model(const fs::path& dir, const CatchModel& model) {
  const int K = model.num_classes();
  if (static_cast<int>(model.coefficients.size()) != K - 1 ||
      static_cast<int>(model.intercepts.size()) != K)
    throw DataError("only fitted models can be saved");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create model directory " + dir.string() + ": " + ec.message());

  csv::write_row(dir / "priors.csv", model.priors);
  csv::write_row(dir / "intercepts.csv", model.intercepts);
  for (std::size_t k = 0; k < model.mu.size(); ++k) write_ctb(numbered(dir, "mu", k + 1, ".ctb"), model.mu[k]);
  for (std::size_t k = 0; k < model.coefficients.size(); ++k)
    write_ctb(numbered(dir, "B", k + 2, ".ctb"), model.coefficients[k]);
  for (std::size_t m = 0; m < model.sigmas.size(); ++m)
    csv::write_matrix(numbered(dir, "sigma", m + 1, ".csv"), model.sigmas[m]);
  if (model.covariates) {
    csv::write_matrix(dir / "phi.csv", stack_rows(model.covariates->phi));
    csv::write_matrix(dir / "psi.csv", model.covariates->psi);
    csv::write_matrix(dir / "gamma.csv", stack_rows(model.covariates->gamma));
    if (model.alpha) write_ctb(dir / "alpha.ctb", *model.alpha);
  }
}

CatchModel load_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("model directory " + dir.string() + " does not exist");
  CatchModel model;
  model.priors = csv::read_row(dir / "priors.csv");
  model.intercepts = csv::read_row(dir / "intercepts.csv");
  const std::size_t K = model.priors.size();
  if (K < 2 || model.intercepts.size() != K)
    throw DataError("model directory has inconsistent class counts");
  for (std::size_t k = 1; k <= K; ++k) model.mu.push_back(read_ctb(numbered(dir, "mu", k, ".ctb")));
  for (std::size_t k = 2; k <= K; ++k)
    model.coefficients.push_back(read_ctb(numbered(dir, "B", k, ".ctb")));
  const TensorShape& shape = model.mu.front().shape();
  for (std::size_t m = 1; m <= shape.order(); ++m)
    model.sigmas.push_back(csv::read_matrix(numbered(dir, "sigma", m, ".csv")));
  for (const auto& t : model.mu)
    if (t.shape() != shape) throw DataError("model class means have different shapes");
  for (const auto& t : model.coefficients)
    if (t.shape() != shape) throw DataError("model coefficients do not match the mean shape");
  for (std::size_t m = 0; m < shape.order(); ++m)
    if (static_cast<std::size_t>(model.sigmas[m].rows()) != shape[m] ||
        model.sigmas[m].rows() != model.sigmas[m].cols())
      throw DataError("sigma_" + std::to_string(m + 1) + ".csv does not match mode extent");

  if (fs::exists(dir / "psi.csv")) {
    CovariateBlock block;
    block.psi = csv::read_matrix(dir / "psi.csv");
    block.phi = split_rows(csv::read_matrix(dir / "phi.csv"));
    block.gamma = split_rows(csv::read_matrix(dir / "gamma.csv"));
    const auto q = block.psi.rows();
    if (q == 0 || block.psi.cols() != q || block.phi.size() != K || block.gamma.size() != K)
      throw DataError("model covariate files are inconsistent");
    for (std::size_t k = 0; k < K; ++k)
      if (block.phi[k].size() != q || block.gamma[k].size() != q)
        throw DataError("model covariate files are inconsistent");
    model.covariates = std::move(block);
    if (fs::exists(dir / "alpha.ctb")) {
      model.alpha = read_ctb(dir / "alpha.ctb");
      if (model.alpha->shape() != shape.append(static_cast<std::size_t>(q)))
        throw DataError("alpha.ctb does not match the model shape");
    }
  }
  return model;
}

} // namespace tcatch
