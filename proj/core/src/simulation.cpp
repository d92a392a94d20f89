#include "tcatch/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "tcatch/classifier.hpp"

namespace tcatch {

namespace {

constexpr std::uint64_t train_stream = 0;
constexpr std::uint64_t validation_stream = 1;
constexpr std::uint64_t test_stream_base = 1000;

std::vector<std::size_t> range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  for (std::size_t i = first; i <= last; ++i) out.push_back(i);
  return out;
}

CovSpec identity(std::size_t size) { return {CovKind::identity, 0.0, size}; }
CovSpec ar(double rho, std::size_t size) { return {CovKind::ar, rho, size}; }
CovSpec cs(double rho, std::size_t size) { return {CovKind::cs, rho, size}; }

// The catalog's shared index sets.
const std::vector<std::size_t> rows_d{1, 2, 11, 12};

SimulationSpec matrix_model(const std::string& name, CovSpec s1, CovSpec s2, double b,
                            double b3_d2) {
  SimulationSpec spec;
  spec.name = name;
  spec.shape = TensorShape{64, 64};
  spec.class_sizes = {75, 75, 75, 75};
  spec.covariances = {s1, s2};
  const std::vector<std::size_t> cols_d1{1, 2}, cols_d2{11, 12}, cols_d{1, 2, 11, 12};
  spec.coefficients = {
      {{{rows_d, cols_d}, b}},
      {{{rows_d, cols_d1}, b}, {{rows_d, cols_d2}, b3_d2}},
      {{{rows_d, cols_d1}, -b}, {{rows_d, cols_d2}, b}},
  };
  return spec;
}

SimulationSpec tensor_model(const std::string& name, std::size_t p, CovSpec s1, CovSpec s2,
                            CovSpec s3, double b, double b3_d2) {
  SimulationSpec spec;
  spec.name = name;
  spec.shape = p == 80 ? TensorShape{80, 80, 80} : TensorShape{30, 36, 30};
  spec.class_sizes = {75, 75, 75};
  spec.covariances = {s1, s2, s3};
  const std::vector<std::size_t> j_d{1, 11};
  spec.coefficients = {
      {{{rows_d, j_d, {1, 11}}, b}},
      {{{rows_d, j_d, {1}}, b}, {{rows_d, j_d, {11}}, b3_d2}},
  };
  return spec;
}

SimulationSpec covariate_model(const std::string& name, bool large, CovSpec s1, CovSpec s2,
                               CovSpec s3, double b, bool alpha_two) {
  SimulationSpec spec;
  spec.name = name;
  spec.shape = large ? TensorShape{80, 80, 80} : TensorShape{30, 36, 30};
  spec.class_sizes = {75, 75};
  spec.covariances = {s1, s2, s3};
  spec.coefficients = {{{{rows_d, {1, 11}, {1, 11}}, b}}};
  spec.num_covariates = 2;
  spec.phi = {Vector::Zero(2), Vector::Constant(2, 0.3)};
  spec.psi = Matrix::Identity(2, 2);
  if (alpha_two)
    spec.alpha_star = {{{range(1, 15), range(1, 15), range(1, 15), {1}}, 1.0}};
  else
    spec.alpha_star = {{{range(1, 5), range(1, 5), range(1, 5), {1}}, 0.5}};
  return spec;
}

SimulationSpec build_catalog(const std::string& name) {
  if (name == "M1") return matrix_model(name, identity(64), identity(64), 0.6, 1.8);
  if (name == "M2") return matrix_model(name, identity(64), ar(0.7, 64), 0.4, 1.2);
  if (name == "M3") return matrix_model(name, cs(0.3, 64), ar(0.7, 64), 0.4, 1.2);
  if (name == "T1") return tensor_model(name, 30, identity(30), identity(36), identity(30), 0.6, 1.5);
  if (name == "T2") return tensor_model(name, 30, ar(0.7, 30), identity(36), cs(0.3, 30), 0.4, 1.0);
  if (name == "T3" || name == "T3i") {
    auto spec = tensor_model(name, 30, ar(0.7, 30), cs(0.3, 36), cs(0.3, 30), 0.4, 1.0);
    if (name == "T3i") spec.class_sizes = {40, 40, 200};
    return spec;
  }
  const bool large = name.size() == 3 && name[2] == 'H';
  const std::string base = large ? name.substr(0, 2) : name;
  const std::size_t p3 = large ? 80 : 30, p2 = large ? 80 : 36, p1 = large ? 80 : 30;
  if (base == "C1")
    return covariate_model(name, large, identity(p1), identity(p2), identity(p3), 0.8, true);
  if (base == "C2")
    return covariate_model(name, large, ar(0.7, p1), identity(p2), cs(0.3, p3), 0.4, false);
  if (base == "C3" || name == "C3a" || name == "C3b" || name == "C3i") {
    auto spec = covariate_model(name, large, ar(0.7, p1), cs(0.3, p2), cs(0.3, p3), 0.4, false);
    if (name == "C3a") {
      spec.phi[1] = Vector::Constant(2, 1.0);
      spec.alpha_star.clear();
    } else if (name == "C3b") {
      spec.phi[1] = Vector::Zero(2);
    } else if (name == "C3i") {
      spec.class_sizes = {40, 200};
    }
    return spec;
  }
  std::string list;
  for (const auto& n : catalog_names()) list += (list.empty() ? "" : ", ") + n;
  throw UnknownModelError("unknown model '" + name + "'; catalog: " + list);
}

// Writes `value` at every position of a placement into `t`.
void place(DenseTensor& t, const Placement& placement, const std::string& what) {
  const TensorShape& shape = t.shape();
  if (placement.index_sets.size() != shape.order())
    throw DataError(what + ": placement needs " + std::to_string(shape.order()) + " index lists");
  for (std::size_t m = 0; m < shape.order(); ++m)
    for (std::size_t i : placement.index_sets[m])
      if (i < 1 || i > shape[m])
        throw DataError(what + ": index " + std::to_string(i) + " outside mode " +
                        std::to_string(m + 1) + " of extent " + std::to_string(shape[m]));
  MultiIndex idx{std::vector<std::size_t>(shape.order())};
  std::vector<std::size_t> counter(shape.order(), 0);
  if (std::any_of(placement.index_sets.begin(), placement.index_sets.end(),
                  [](const auto& s) { return s.empty(); }))
    return;
  while (true) {
    for (std::size_t m = 0; m < shape.order(); ++m) idx.coords[m] = placement.index_sets[m][counter[m]];
    t.at(idx) = placement.value;
    std::size_t m = 0;
    while (m < shape.order() && ++counter[m] == placement.index_sets[m].size()) counter[m++] = 0;
    if (m == shape.order()) break;
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("spec key '" + key + "': '" + s + "' is not a number");
  }
}

std::size_t parse_count(const std::string& s, const std::string& key) {
  const double v = parse_double(s, key);
  if (v < 0 || v != std::floor(v)) throw DataError("spec key '" + key + "': '" + s + "' is not a count");
  return static_cast<std::size_t>(v);
}

std::vector<std::size_t> parse_counts(const std::string& s, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_count(item, key));
  return out;
}

Vector parse_vector(const std::string& s, const std::string& key) {
  const auto items = split(s, ',');
  Vector v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = parse_double(items[i], key);
  return v;
}

// "identity", "ar:0.7" or "cs:0.3".
CovSpec parse_cov(const std::string& s, std::size_t size, const std::string& key) {
  const auto parts = split(s, ':');
  if (parts.size() == 1 && parts[0] == "identity") return identity(size);
  if (parts.size() == 2 && parts[0] == "ar") return ar(parse_double(parts[1], key), size);
  if (parts.size() == 2 && parts[0] == "cs") return cs(parse_double(parts[1], key), size);
  throw DataError("spec key '" + key + "': expected identity, ar:<rho> or cs:<rho>");
}

// "value @ 1,2,11,12 ; 1,2" with ranges like 1-5 allowed.
Placement parse_placement(const std::string& s, const std::string& key) {
  const auto at = s.find('@');
  if (at == std::string::npos) throw DataError("spec key '" + key + "': expected 'value @ indices'");
  Placement p;
  p.value = parse_double(trim(s.substr(0, at)), key);
  for (const auto& set : split(s.substr(at + 1), ';')) {
    std::vector<std::size_t> idx;
    for (const auto& item : split(set, ',')) {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        idx.push_back(parse_count(item, key));
      } else {
        const auto lo = parse_count(trim(item.substr(0, dash)), key);
        const auto hi = parse_count(trim(item.substr(dash + 1)), key);
        for (auto i = lo; i <= hi; ++i) idx.push_back(i);
      }
    }
    p.index_sets.push_back(std::move(idx));
  }
  return p;
}

void check_spec(const SimulationSpec& spec) {
  const std::string where = "spec '" + spec.name + "'";
  if (spec.shape.order() == 0) throw DataError(where + ": shape is missing");
  if (spec.class_sizes.size() < 2) throw DataError(where + ": need at least two classes");
  if (spec.covariances.size() != spec.shape.order())
    throw DataError(where + ": need one covariance per mode");
  for (std::size_t m = 0; m < spec.shape.order(); ++m)
    if (spec.covariances[m].size != spec.shape[m])
      throw DataError(where + ": covariance " + std::to_string(m + 1) + " has the wrong size");
  if (spec.coefficients.size() + 1 != spec.class_sizes.size())
    throw DataError(where + ": need coefficient placements for classes 2..K");
  if (!spec.validation_sizes.empty() && spec.validation_sizes.size() != spec.class_sizes.size())
    throw DataError(where + ": validation_sizes must have one entry per class");
  if (spec.num_covariates > 0) {
    if (spec.phi.size() != spec.class_sizes.size())
      throw DataError(where + ": need one covariate mean per class");
    for (const auto& phi : spec.phi)
      if (static_cast<std::size_t>(phi.size()) != spec.num_covariates)
        throw DataError(where + ": covariate mean has the wrong length");
    if (static_cast<std::size_t>(spec.psi.rows()) != spec.num_covariates ||
        spec.psi.rows() != spec.psi.cols())
      throw DataError(where + ": psi must be q x q");
  }
}

std::vector<int> labels_by_class(const std::vector<std::size_t>& sizes) {
  std::vector<int> y;
  for (std::size_t k = 0; k < sizes.size(); ++k) y.insert(y.end(), sizes[k], static_cast<int>(k + 1));
  return y;
}

} // namespace

Matrix make_cov(const CovSpec& spec) {
  const auto p = static_cast<Eigen::Index>(spec.size);
  if (p < 1) throw std::invalid_argument("covariance size must be positive");
  switch (spec.kind) {
  case CovKind::identity:
    return Matrix::Identity(p, p);
  case CovKind::ar: {
    if (!(std::abs(spec.rho) < 1)) throw std::invalid_argument("AR(rho) needs |rho| < 1");
    Matrix s(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j) s(i, j) = std::pow(spec.rho, static_cast<double>(std::abs(i - j)));
    return s;
  }
  case CovKind::cs: {
    const double lower = p > 1 ? -1.0 / static_cast<double>(p - 1) : -1.0;
    if (!(spec.rho > lower && spec.rho < 1)) throw std::invalid_argument("CS(rho) needs -1/(p-1) < rho < 1");
    Matrix s = Matrix::Constant(p, p, spec.rho);
    s.diagonal().setOnes();
    return s;
  }
  }
  throw std::invalid_argument("unknown covariance kind");
}

Matrix sym_sqrt(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw DimensionError("square root needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  if (!(eig.eigenvalues().minCoeff() > 0)) throw NumericalError("covariance is not positive definite");
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

std::vector<std::string> catalog_names() {
  return {"M1", "M2", "M3", "T1", "T2", "T3", "T3i", "C1", "C2", "C3", "C3a", "C3b", "C3i",
          "C1H", "C2H", "C3H"};
}

SimulationSpec catalog_spec(const std::string& name) {
  return build_catalog(name);
}

SimulationSpec example1_spec(double alpha) {
  SimulationSpec spec;
  spec.name = "example1";
  spec.shape = TensorShape{2, 2};
  spec.class_sizes = {75, 75};
  spec.covariances = {identity(2), identity(2)};
  spec.coefficients = {{{{{1}, {1}}, 2.0}}};
  spec.num_covariates = 1;
  spec.phi = {Vector::Zero(1), Vector::Zero(1)};
  spec.psi = Matrix::Identity(1, 1);
  spec.alpha_star = {{{{1, 2}, {1}, {1}}, alpha}};
  return spec;
}

SimulationSpec parse_spec(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("spec line " + std::to_string(line_no) + ": expected key = value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  SimulationSpec spec;
  for (const auto& [key, value] : entries)
    if (key == "base") spec = catalog_spec(value);

  std::map<std::string, std::string> covs;
  std::map<std::size_t, std::vector<Placement>> coefs;
  std::map<std::size_t, Vector> phis;
  std::vector<Placement> alpha;
  bool alpha_given = false;
  std::optional<Matrix> psi;
  for (const auto& [key, value] : entries) {
    if (key == "base") continue;
    if (key == "name") spec.name = value;
    else if (key == "shape") spec.shape = TensorShape(parse_counts(value, key));
    else if (key == "class_sizes") spec.class_sizes = parse_counts(value, key);
    else if (key == "validation_sizes") spec.validation_sizes = parse_counts(value, key);
    else if (key == "test_size") spec.test_size = parse_count(value, key);
    else if (key == "num_covariates") spec.num_covariates = parse_count(value, key);
    else if (key.rfind("cov.", 0) == 0) covs[key] = value;
    else if (key.rfind("coef.", 0) == 0) {
      const auto k = parse_count(key.substr(5), key);
      if (k < 2) throw DataError("spec key '" + key + "': coefficients start at class 2");
      coefs[k].push_back(parse_placement(value, key));
    } else if (key.rfind("phi.", 0) == 0) {
      const auto k = parse_count(key.substr(4), key);
      if (k < 1) throw DataError("spec key '" + key + "': classes start at 1");
      phis[k] = parse_vector(value, key);
    } else if (key == "alpha_star") {
      alpha_given = true;
      if (value != "none") alpha.push_back(parse_placement(value, key));
    } else if (key == "psi") {
      const auto rows = split(value, ';');
      Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Vector row = parse_vector(rows[r], key);
        if (row.size() != m.cols()) throw DataError("spec key 'psi' must be square");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      psi = m;
    } else {
      throw DataError("unknown spec key '" + key + "'");
    }
  }
  if (spec.name.empty()) spec.name = "custom";

  const std::size_t order = spec.shape.order();
  if (!covs.empty() || spec.covariances.size() != order) {
    std::vector<CovSpec> updated(order);
    for (std::size_t m = 0; m < order; ++m) {
      const auto it = covs.find("cov." + std::to_string(m + 1));
      if (it != covs.end()) updated[m] = parse_cov(it->second, spec.shape[m], it->first);
      else if (m < spec.covariances.size() && spec.covariances[m].size == spec.shape[m])
        updated[m] = spec.covariances[m];
      else updated[m] = identity(spec.shape[m]);
    }
    for (const auto& [key, value] : covs)
      if (parse_count(key.substr(4), key) < 1 || parse_count(key.substr(4), key) > order)
        throw DataError("spec key '" + key + "' names a mode outside the shape");
    spec.covariances = std::move(updated);
  }
  const std::size_t K = spec.class_sizes.size();
  if (K >= 2) spec.coefficients.resize(K - 1);
  for (auto& [k, placements] : coefs) {
    if (k > K) throw DataError("spec key 'coef." + std::to_string(k) + "' names a class beyond K");
    spec.coefficients[k - 2] = std::move(placements);
  }
  if (spec.num_covariates > 0) {
    spec.phi.resize(K, Vector::Zero(static_cast<Eigen::Index>(spec.num_covariates)));
    for (auto& [k, v] : phis) {
      if (k > K) throw DataError("spec key 'phi." + std::to_string(k) + "' names a class beyond K");
      spec.phi[k - 1] = v;
    }
    const auto q = static_cast<Eigen::Index>(spec.num_covariates);
    if (psi) spec.psi = *psi;
    else if (spec.psi.rows() != q) spec.psi = Matrix::Identity(q, q);
    if (alpha_given) spec.alpha_star = std::move(alpha);
  } else {
    spec.phi.clear();
    spec.psi.resize(0, 0);
    spec.alpha_star.clear();
  }
  check_spec(spec);
  return spec;
}

SimulationSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file " + path.string());
  return parse_spec(in);
}

SimulationSpec resolve_spec(const std::string& name_or_path) {
  const auto names = catalog_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    return catalog_spec(name_or_path);
  if (std::filesystem::exists(name_or_path)) return load_spec(name_or_path);
  return catalog_spec(name_or_path);
}

TrueParameters true_parameters(const SimulationSpec& spec) {
  check_spec(spec);
  TrueParameters t;
  t.shape = spec.shape;
  const std::size_t order = spec.shape.order();
  for (std::size_t m = 0; m < order; ++m) {
    t.sigmas.push_back(make_cov(spec.covariances[m]));
    t.identity_mode.push_back(spec.covariances[m].kind == CovKind::identity);
    t.roots.push_back(t.identity_mode.back() ? t.sigmas.back() : sym_sqrt(t.sigmas.back()));
  }

  const int K = spec.num_classes();
  std::vector<char> in_support(spec.shape.size(), 0);
  t.mu.emplace_back(spec.shape);
  for (int k = 2; k <= K; ++k) {
    DenseTensor b(spec.shape);
    for (const auto& pl : spec.coefficients[static_cast<std::size_t>(k - 2)])
      place(b, pl, "coefficient B_" + std::to_string(k));
    for (std::size_t j = 0; j < b.size(); ++j)
      if (b[j] != 0.0) in_support[j] = 1;
    t.mu.push_back(tucker(b, t.sigmas));
    t.coefficients.push_back(std::move(b));
  }
  for (std::size_t j = 0; j < in_support.size(); ++j)
    if (in_support[j]) t.support.push_back(j);

  const auto n_total = static_cast<double>(
      std::accumulate(spec.class_sizes.begin(), spec.class_sizes.end(), std::size_t{0}));
  for (std::size_t n_k : spec.class_sizes) {
    if (n_k == 0) throw DataError("class sizes must be positive");
    t.priors.push_back(static_cast<double>(n_k) / n_total);
  }

  const auto q = static_cast<Eigen::Index>(spec.num_covariates);
  t.psi.resize(q, q);
  if (q > 0) {
    t.phi = spec.phi;
    t.psi = spec.psi;
    t.psi_root = sym_sqrt(spec.psi);
    DenseTensor alpha_star(spec.shape.append(spec.num_covariates));
    for (const auto& pl : spec.alpha_star) place(alpha_star, pl, "alpha_star");
    std::vector<Matrix> factors = t.roots;
    factors.push_back(Matrix::Identity(q, q));
    t.alpha = tucker(alpha_star, factors);
  }
  return t;
}

CatchModel bayes_model(const TrueParameters& truth) {
  CatchModel model;
  model.priors = truth.priors;
  model.mu = truth.mu;
  model.sigmas = truth.sigmas;
  model.coefficients = truth.coefficients;
  if (truth.num_covariates() > 0) {
    CovariateBlock block;
    block.phi = truth.phi;
    block.psi = truth.psi;
    const Eigen::LLT<Matrix> llt(truth.psi);
    for (const auto& phi : truth.phi) block.gamma.push_back(llt.solve(phi - truth.phi.front()));
    block.gamma.front().setZero();
    model.covariates = std::move(block);
    model.alpha = truth.alpha;
  }
  model.intercepts = compute_intercepts(model);
  return model;
}

DenseTensor sample_tn(const DenseTensor& mean, const std::vector<Matrix>& sigmas,
                      std::size_t count, std::uint64_t seed) {
  if (sigmas.size() != mean.order()) throw DimensionError("need one covariance per mode");
  std::vector<Matrix> roots;
  for (const auto& s : sigmas) roots.push_back(sym_sqrt(s));
  Rng rng(seed);
  boost::random::normal_distribution<double> normal;
  DenseTensor out(mean.shape().append(count));
  for (double& v : out.data()) v = normal(rng);
  if (count > 0)
    for (std::size_t m = 0; m < roots.size(); ++m) out = mode_product(out, m, roots[m]);
  const std::size_t p = mean.size();
  for (std::size_t i = 0; i < count; ++i)
    out.as_matrix(p, count).col(static_cast<Eigen::Index>(i)) += mean.as_vector();
  return out;
}

LabeledDataset draw_observations(const TrueParameters& truth, const std::vector<int>& labels,
                                 Rng& rng) {
  const std::size_t n = labels.size();
  const std::size_t p = truth.shape.size();
  const std::size_t q = truth.num_covariates();
  boost::random::normal_distribution<double> normal;

  LabeledDataset data;
  data.num_classes = truth.num_classes();
  data.y = labels;
  data.x = DenseTensor(truth.shape.append(n));
  Matrix unoise(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(n));
  auto x = data.x.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < q; ++t)
      unoise(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = normal(rng);
    for (std::size_t j = 0; j < p; ++j) x[i * p + j] = normal(rng);
  }
  if (n > 0)
    for (std::size_t m = 0; m < truth.roots.size(); ++m)
      if (!truth.identity_mode[m]) data.x = mode_product(data.x, m, truth.roots[m]);

  auto xs = data.x.as_matrix(p, n);
  if (q > 0) {
    Matrix u = truth.psi_root * unoise;
    for (std::size_t i = 0; i < n; ++i)
      u.col(static_cast<Eigen::Index>(i)) += truth.phi[static_cast<std::size_t>(labels[i] - 1)];
    const auto alpha = truth.alpha->as_matrix(p, q);
    xs.noalias() += alpha * u;
    data.u = u.transpose();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int k = labels[i];
    if (k < 1 || k > truth.num_classes()) throw DataError("label out of range");
    if (k > 1) xs.col(static_cast<Eigen::Index>(i)) += truth.mu[static_cast<std::size_t>(k - 1)].as_vector();
  }
  return data;
}

TestStream::TestStream(const TrueParameters& truth, std::size_t size, std::uint64_t seed,
                       std::uint64_t replicate, std::size_t chunk_size)
    : truth_(&truth), size_(size), seed_(seed), replicate_(replicate), chunk_size_(chunk_size) {
  if (chunk_size_ == 0) throw std::invalid_argument("chunk size must be positive");
}

std::size_t TestStream::num_chunks() const { return (size_ + chunk_size_ - 1) / chunk_size_; }

LabeledDataset TestStream::chunk(std::size_t index) const {
  if (index >= num_chunks()) throw std::out_of_range("test chunk out of range");
  const std::size_t n = std::min(chunk_size_, size_ - index * chunk_size_);
  Rng rng = make_rng(seed_, replicate_, test_stream_base + index);
  boost::random::discrete_distribution<int> pick(truth_->priors.begin(), truth_->priors.end());
  std::vector<int> labels(n);
  for (auto& y : labels) y = pick(rng) + 1;
  return draw_observations(*truth_, labels, rng);
}

LabeledDataset TestStream::materialize() const {
  std::vector<int> labels;
  std::vector<double> values;
  std::optional<Matrix> u;
  const std::size_t q = truth_->num_covariates();
  if (q > 0) u = Matrix(static_cast<Eigen::Index>(size_), static_cast<Eigen::Index>(q));
  std::size_t row = 0;
  for (std::size_t c = 0; c < num_chunks(); ++c) {
    LabeledDataset part = chunk(c);
    labels.insert(labels.end(), part.y.begin(), part.y.end());
    values.insert(values.end(), part.x.data().begin(), part.x.data().end());
    if (u) u->middleRows(static_cast<Eigen::Index>(row), part.u->rows()) = *part.u;
    row += part.size();
  }
  LabeledDataset out;
  out.num_classes = truth_->num_classes();
  out.y = std::move(labels);
  out.x = DenseTensor(truth_->shape.append(size_), std::move(values));
  out.u = std::move(u);
  return out;
}

GeneratedReplicate generate(const SimulationSpec& spec, const TrueParameters& truth,
                            std::uint64_t seed, std::uint64_t replicate) {
  Rng train_rng = make_rng(seed, replicate, train_stream);
  Rng validation_rng = make_rng(seed, replicate, validation_stream);
  const auto& vsizes = spec.validation_sizes.empty() ? spec.class_sizes : spec.validation_sizes;
  return GeneratedReplicate{
      draw_observations(truth, labels_by_class(spec.class_sizes), train_rng),
      draw_observations(truth, labels_by_class(vsizes), validation_rng),
      TestStream(truth, spec.test_size, seed, replicate)};
}

double stream_error(const TestStream& test,
                    const std::function<std::vector<int>(const LabeledDataset&)>& labeler) {
  if (test.size() == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t c = 0; c < test.num_chunks(); ++c) {
    const LabeledDataset part = test.chunk(c);
    const auto predicted = labeler(part);
    for (std::size_t i = 0; i < part.size(); ++i) wrong += predicted[i] != part.y[i];
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

double bayes_rule_error(const TrueParameters& truth, const TestStream& test) {
  const BatchScorer scorer(bayes_model(truth));
  return stream_error(test, [&](const LabeledDataset& d) { return scorer.labels(d.x, d.u); });
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

Example1Rates example1_rates(double alpha) {
  const double a2 = alpha * alpha;
  Example1Rates r;
  r.r_u = 0.5;
  r.r_x11_u = normal_upper_tail(1.0);
  r.r_x11 = normal_upper_tail(1.0 / std::sqrt(1.0 + a2));
  r.r_x = normal_upper_tail(std::sqrt(2.0 + a2) / std::sqrt(2.0 + 2.0 * a2));
  return r;
}

} // namespace tcatch
