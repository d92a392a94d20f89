#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tcatch/classifier.hpp"
#include "tcatch/csv.hpp"
#include "tcatch/ctb.hpp"
#include "tcatch/errors.hpp"
#include "tcatch/experiment.hpp"
#include "tcatch/model_io.hpp"
#include "tcatch/pipeline.hpp"
#include "tcatch/simulation.hpp"
#include "tcatch/tuning.hpp"

namespace fs = std::filesystem;
using namespace tcatch;

namespace {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_io = 2,
  exit_data = 3,
  exit_numerical = 4,
  exit_unknown_model = 5,
};

struct DataPaths {
  std::string x, u, y;
};

struct SolverFlags {
  std::vector<double> lambdas;
  std::size_t nlambda = 50;
  double lambda_min_ratio = 0.0;  // 0 = automatic
  std::size_t max_sweeps = 200;
  std::size_t dfmax = 0;  // 0 = number of observations
  double tol = 1e-6;
  bool no_covariates = false;

  CatchConfig config() const {
    CatchConfig c;
    c.estimation.use_covariates = !no_covariates;
    c.solver.lambdas = lambdas;
    c.solver.num_lambdas = nlambda;
    if (lambda_min_ratio > 0) c.solver.lambda_min_ratio = lambda_min_ratio;
    c.solver.max_sweeps = max_sweeps;
    if (dfmax > 0) c.solver.max_selected = dfmax;
    c.solver.tol = tol;
    return c;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--lambdas", f.lambdas, "Explicit decreasing penalty values")->delimiter(',');
  cmd->add_option("--nlambda", f.nlambda, "Automatic path length")->capture_default_str();
  cmd->add_option("--lambda-min-ratio", f.lambda_min_ratio,
                  "Smallest automatic lambda over lambda_max (default 0.05, or 0.01 when n > p)");
  cmd->add_option("--max-sweeps", f.max_sweeps, "Sweep limit per lambda")->capture_default_str();
  cmd->add_option("--dfmax", f.dfmax, "Stop the path once more positions are selected (default n)");
  cmd->add_option("--tol", f.tol, "Coefficient change tolerance")->capture_default_str();
  cmd->add_flag("--no-covariates", f.no_covariates, "Ignore U even when given");
}

std::string format(double v) { return csv::format_double(v); }

LabeledDataset read_dataset(const std::string& x_path, const std::string& u_path,
                            const std::string& y_path, int num_classes) {
  LabeledDataset data;
  data.x = read_ctb(fs::path(x_path));
  if (data.x.order() < 2) throw DimensionError("X must stack observations along an extra last mode");
  const std::size_t n = data.x.shape()[data.x.order() - 1];
  if (!u_path.empty()) {
    Matrix u = csv::read_matrix(u_path);
    if (u.rows() == 0 && n == 0) u.resize(0, 0);
    data.u = std::move(u);
  }
  if (!y_path.empty()) data.y = csv::read_labels(y_path);
  int max_label = 0;
  for (int y : data.y) max_label = std::max(max_label, y);
  data.num_classes = num_classes > 0 ? num_classes : max_label;
  return data;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::ofstream open_out(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Stdout when the path is empty or "-".
class Output {
public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") file_ = open_out(path);
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

void write_path_csv(const fs::path& path, const FitPath& fit_path,
                    const std::vector<double>& selection_errors) {
  auto out = open_out(path);
  out << "lambda,n_selected,objective,sweeps,converged,kkt_violation,selection_error\n";
  for (std::size_t i = 0; i < fit_path.points.size(); ++i) {
    const auto& p = fit_path.points[i];
    out << format(p.lambda) << ',' << p.selected.size() << ',' << format(p.objective) << ','
        << p.sweeps << ',' << (p.converged ? 1 : 0) << ',' << format(p.kkt_violation) << ','
        << (selection_errors.empty() ? std::string("NA") : format(selection_errors[i])) << '\n';
  }
}

int run_fit(const DataPaths& train, const DataPaths& val, int classes, std::size_t folds,
            const SolverFlags& flags, const std::string& out_dir, std::string path_csv) {
  const LabeledDataset data = read_dataset(train.x, train.u, train.y, classes);
  validate(data, true);
  CatchConfig config = flags.config();

  std::vector<double> selection_errors;
  std::optional<CvResult> cv;
  if (folds > 0) {
    cv = cross_validate(data, config, folds);
    config.solver.lambdas = cv->lambdas;
  }
  const CatchFit fit = fit_catch(data, config);
  std::size_t chosen = fit.path.points.size() - 1;
  if (!val.x.empty()) {
    LabeledDataset v = read_dataset(val.x, val.u, val.y, data.num_classes);
    validate(v, false);
    if (!config.estimation.use_covariates) v = drop_covariates(v);
    selection_errors = path_errors(fit, v);
    chosen = select_index(selection_errors);
  } else if (cv) {
    selection_errors = cv->mean_error;
    chosen = cv->chosen_index;
  }

  save_model(out_dir, model_at(fit, chosen));
  if (path_csv.empty()) path_csv = (fs::path(out_dir) / "path.csv").string();
  write_path_csv(path_csv, fit.path, selection_errors);

  const auto& point = fit.path.points[chosen];
  std::cout << "lambda=" << format(point.lambda) << " selected=" << point.selected.size()
            << " converged=" << (point.converged ? "yes" : "no") << '\n';
  std::size_t unconverged = 0;
  for (const auto& p : fit.path.points) unconverged += !p.converged;
  if (unconverged > 0)
    std::cerr << "warning: " << unconverged << " path point(s) hit the sweep limit\n";
  return exit_ok;
}

int run_predict(const std::string& model_dir, const DataPaths& test, const std::string& out_path) {
  const CatchModel model = load_model(model_dir);
  LabeledDataset data = read_dataset(test.x, test.u, test.y, model.num_classes());
  const std::size_t n = data.x.shape()[data.x.order() - 1];
  if (!test.y.empty() && data.y.size() != n)
    throw DataError("label count " + std::to_string(data.y.size()) + " does not match " +
                    std::to_string(n) + " observations");
  if (model.has_covariates() && data.u && n == 0)
    data.u = Matrix(0, model.covariates->psi.rows());
  if (model.has_covariates() && !data.u)
    throw DataError("model was fit with covariates; pass --u");
  if (!model.has_covariates() && data.u)
    throw DataError("model was fit without covariates; do not pass --u");
  const auto predictions = classify_batch(model, data.x, data.u);

  Output out(out_path);
  auto& os = out.stream();
  os << "index,label";
  for (int k = 1; k <= model.num_classes(); ++k) os << ",score_" << k;
  os << '\n';
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    os << i + 1 << ',' << predictions[i].label;
    for (double s : predictions[i].scores) os << ',' << format(s);
    os << '\n';
  }
  if (!test.y.empty()) {
    std::vector<int> labels;
    for (const auto& p : predictions) labels.push_back(p.label);
    std::cerr << "error_rate=" << format(error_rate(labels, data.y)) << '\n';
  }
  return exit_ok;
}

int run_cv(const DataPaths& train, int classes, std::size_t folds, const SolverFlags& flags,
           const std::string& out_path) {
  const LabeledDataset data = read_dataset(train.x, train.u, train.y, classes);
  const CvResult cv = cross_validate(data, flags.config(), folds);
  Output out(out_path);
  auto& os = out.stream();
  os << "lambda,mean_error";
  for (std::size_t f = 0; f < folds; ++f) os << ",fold_" << f + 1;
  os << '\n';
  for (std::size_t l = 0; l < cv.lambdas.size(); ++l) {
    os << format(cv.lambdas[l]) << ',' << format(cv.mean_error[l]);
    for (std::size_t f = 0; f < folds; ++f) os << ',' << format(cv.fold_error[f][l]);
    os << '\n';
  }
  std::cerr << "chosen_lambda=" << format(cv.chosen_lambda) << '\n';
  return exit_ok;
}

std::string percent_or_na(const std::optional<double>& v) {
  return v ? format(100.0 * *v) : std::string("NA");
}

int run_simulate(const std::string& model_name, const std::vector<std::string>& methods,
                 std::size_t replicates, std::uint64_t seed, std::size_t threads,
                 const SolverFlags& flags, const std::string& out_path) {
  const SimulationSpec spec = resolve_spec(model_name);
  ExperimentConfig config;
  config.methods.clear();
  for (const auto& m : methods) config.methods.push_back(parse_method(m));
  config.replicates = replicates;
  config.seed = seed;
  config.threads = threads;
  config.catch_config = flags.config();
  const ExperimentResult result = run_experiments(spec, config);

  Output out(out_path);
  auto& os = out.stream();
  os << "method,model,replicates,mean_error,se_error,mean_tpr,mean_fpr\n";
  for (const auto& s : result.methods) {
    os << method_name(s.method) << ',' << result.model << ',' << s.replicates << ','
       << format(100.0 * s.mean_error) << ',' << format(100.0 * s.se_error) << ','
       << percent_or_na(s.mean_tpr) << ',' << percent_or_na(s.mean_fpr) << '\n';
    if (s.fits > 0 && !(s.all_converged && s.all_monotone))
      std::cerr << "warning: " << method_name(s.method)
                << " had non-converged or non-monotone path fits\n";
  }
  return exit_ok;
}

void write_dataset(const fs::path& dir, const std::string& stem, const LabeledDataset& d) {
  write_ctb(dir / (stem + "_x.ctb"), d.x);
  csv::write_labels(dir / (stem + "_y.csv"), d.y);
  if (d.u) csv::write_matrix(dir / (stem + "_u.csv"), *d.u);
}

int run_generate(const std::string& model_name, std::uint64_t seed, std::size_t replicate,
                 std::optional<std::size_t> test_size, const std::string& out_dir) {
  SimulationSpec spec = resolve_spec(model_name);
  if (test_size) spec.test_size = *test_size;
  const TrueParameters truth = true_parameters(spec);
  const GeneratedReplicate data = generate(spec, truth, seed, replicate);
  fs::create_directories(out_dir);
  write_dataset(out_dir, "train", data.train);
  write_dataset(out_dir, "validation", data.validation);
  write_dataset(out_dir, "test", data.test.materialize());
  return exit_ok;
}

int run_example1(const std::vector<double>& alphas, const std::string& out_path) {
  Output out(out_path);
  auto& os = out.stream();
  os << "alpha,R_U,R_X11_U,R_X11,R_X\n";
  for (double a : alphas) {
    const auto r = example1_rates(a);
    os << format(a) << ',' << format(r.r_u) << ',' << format(r.r_x11_u) << ','
       << format(r.r_x11) << ',' << format(r.r_x) << '\n';
  }
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariate-adjusted sparse tensor discriminant analysis"};
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.require_subcommand(1);

  DataPaths train, val, test;
  SolverFlags solver;
  int classes = 0;
  std::size_t folds = 0;
  std::string out, path_csv, model_dir, model_name = "M1";
  std::vector<std::string> methods{"catch"};
  std::size_t replicates = 1, threads = 1, replicate = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> test_size;
  std::vector<double> alphas{0, 1, 2, 4, 8};

  auto* fit = app.add_subcommand("fit", "Estimate a model and its lambda path");
  fit->add_option("--x", train.x, "Training tensor (CTB, observations last)")->required();
  fit->add_option("--u", train.u, "Training covariates (CSV, n x q)");
  fit->add_option("--y", train.y, "Training labels (CSV)")->required();
  fit->add_option("--classes", classes, "Number of classes (default: largest label)");
  fit->add_option("--val-x", val.x, "Validation tensor for choosing lambda");
  fit->add_option("--val-u", val.u, "Validation covariates");
  fit->add_option("--val-y", val.y, "Validation labels");
  fit->add_option("--folds", folds, "Choose lambda by stratified cross-validation");
  fit->add_option("--out", out, "Model directory")->required();
  fit->add_option("--path-csv", path_csv, "Path summary (default <out>/path.csv)");
  add_solver_flags(fit, solver);

  auto* predict = app.add_subcommand("predict", "Classify observations with a saved model");
  predict->add_option("--model", model_dir, "Model directory")->required();
  predict->add_option("--x", test.x, "Tensor (CTB, observations last)")->required();
  predict->add_option("--u", test.u, "Covariates (CSV)");
  predict->add_option("--y", test.y, "True labels; prints the error rate");
  predict->add_option("--out", out, "Predictions CSV (default stdout)");

  auto* cv = app.add_subcommand("cv", "Cross-validate the lambda path");
  cv->add_option("--x", train.x, "Tensor (CTB, observations last)")->required();
  cv->add_option("--u", train.u, "Covariates (CSV)");
  cv->add_option("--y", train.y, "Labels (CSV)")->required();
  cv->add_option("--classes", classes, "Number of classes (default: largest label)");
  cv->add_option("--folds", folds, "Number of folds")->required()->check(CLI::Range(2, 1000000));
  cv->add_option("--out", out, "CV curve CSV (default stdout)");
  add_solver_flags(cv, solver);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiment on a catalog or custom model");
  simulate->add_option("--model", model_name, "Catalog name or spec file")->required();
  simulate->add_option("--methods", methods,
                       "catch, catch_x, bayes, tensor_oracle, vector_oracle")->delimiter(',');
  simulate->add_option("--replicates", replicates, "Replicates")->capture_default_str();
  simulate->add_option("--seed", seed, "Random seed")->required();
  simulate->add_option("--threads", threads, "Worker threads for replicates")->capture_default_str();
  simulate->add_option("--out", out, "Results CSV (default stdout)");
  add_solver_flags(simulate, solver);

  auto* generate_cmd = app.add_subcommand("generate", "Write one simulated replicate to disk");
  generate_cmd->add_option("--model", model_name, "Catalog name or spec file")->required();
  generate_cmd->add_option("--seed", seed, "Random seed")->required();
  generate_cmd->add_option("--replicate", replicate, "Replicate index")->capture_default_str();
  generate_cmd->add_option("--test-size", test_size, "Override the test set size");
  generate_cmd->add_option("--out", out, "Output directory")->required();

  auto* example1 = app.add_subcommand("example1", "Closed-form error rates of the toy example");
  example1->add_option("--alpha", alphas, "Indirect-effect sizes")->delimiter(',')->capture_default_str();
  example1->add_option("--out", out, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*fit) return run_fit(train, val, classes, folds, solver, out, path_csv);
    if (*predict) return run_predict(model_dir, test, out);
    if (*cv) return run_cv(train, classes, folds, solver, out);
    if (*simulate) return run_simulate(model_name, methods, replicates, seed, threads, solver, out);
    if (*generate_cmd) return run_generate(model_name, seed, replicate, test_size, out);
    if (*example1) return run_example1(alphas, out);
  } catch (const UnknownModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_unknown_model;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return exit_io;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return exit_io;
  } catch (const DimensionError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return exit_data;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}
