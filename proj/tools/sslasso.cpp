// Command-line front end: fit estimators on CSV datasets, compute cone
// constants, evaluate tuning formulas, and run Monte Carlo verification
// campaigns. Machine-readable JSON goes to stdout (or --output), human
// progress to stderr. Exit codes: 0 success, 1 usage/validation error,
// 2 verification below threshold.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "sslasso/sslasso.hpp"

namespace {

using namespace sslasso;

std::string format_real(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.15g", v);
  return buffer;
}

void emit(const Json& payload, const std::optional<std::string>& output_path) {
  const std::string text = payload.dump(2) + "\n";
  if (output_path) {
    write_file_atomically(*output_path, text);
  } else {
    std::cout << text;
  }
}

Matrix load_square_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    std::vector<double> row;
    for (std::size_t j = 0; j < fields.size(); ++j)
      row.push_back(detail::parse_real(fields[j], line_no, j + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix file " + path + " is empty");
  const std::size_t p = rows.size();
  Matrix m(static_cast<Index>(p), static_cast<Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    if (rows[i].size() != p)
      throw ParseError("matrix file " + path + " is not square at row " +
                       std::to_string(i + 1));
    for (std::size_t j = 0; j < p; ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return m;
}

IndexSet parse_support_list(const std::string& text, Index p) {
  IndexSet support;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    const std::string t = detail::trim(token);
    if (t.empty()) continue;
    std::int64_t one_based = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), one_based);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw InvalidInput("--support: bad index '" + t + "'");
    support.push_back(static_cast<Index>(one_based - 1));
  }
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  check_support(support, p);
  return support;
}

struct LambdaArgs {
  std::string theorem;
  double label_bound = 1.0;
  double feature_bound = 1.0;
  std::int64_t n = 0;
  std::int64_t n_star = 0;
  std::int64_t total_count = 0;
  int p = 0;
  double delta = 0.1;
  double gamma = 2.0;
  bool explain = false;
};

int run_lambda(const LambdaArgs& a) {
  if (a.p < 1) throw InvalidInput("--p is required and must be >= 1");
  double value = 0.0;
  std::string formula;
  BoundInputs in;
  in.feature_bound = a.feature_bound;
  in.label_bound = a.label_bound;
  in.p = a.p;
  in.delta = a.delta;
  in.gamma = a.gamma;

  if (a.theorem == "T1") {
    const std::int64_t n_star = a.n_star > 0 ? a.n_star : a.n;
    if (n_star < 1)
      throw InvalidInput("--nstar (or --n) is required for theorem T1");
    in.n = n_star;
    in.m = n_star;
    in.total_count = 2 * n_star;
    value = lambda_transductive(in);
    formula = "2*gamma*B_Y*sqrt(log(2p/delta)/n_star)"
              "*[1 + (B_X/3)*sqrt(log(2p/delta)/n_star)]";
  } else if (a.theorem == "T2" || a.theorem == "T2a" || a.theorem == "T2b") {
    if (a.n < 1) throw InvalidInput("--n is required for theorem T2");
    in.n = a.n;
    in.total_count = std::max(a.total_count, a.n);
    in.m = in.total_count - in.n;
    value = lambda_semisup_wellspec(in);
    formula = "4*B_Y*sqrt(log(4p/delta)/n)*[1 + (B_X/2)*sqrt(log(4p/delta)/n)]";
  } else if (a.theorem == "T3" || a.theorem == "Cor1" || a.theorem == "COR1") {
    if (a.n < 1) throw InvalidInput("--n is required for theorem T3/Cor1");
    in.n = a.n;
    in.total_count = std::max(a.total_count, a.n);
    in.m = in.total_count - in.n;
    value = lambda_semisup_misspec(in);
    formula = "8*B_X*B_Y*sqrt(log(6p/delta)/n)"
              "*[1 + (B_X/3)*sqrt(log(6p/delta)/n)]";
  } else if (a.theorem == "T4") {
    if (a.n < 1 || a.total_count < a.n)
      throw InvalidInput("--n and --N are required for theorem T4");
    value = lambda_expectation(a.feature_bound, a.label_bound, a.n,
                               a.total_count, a.p);
    formula = "8*B_X*B_Y*sqrt(log(6p N^2)/n)*[1 + (B_X/3)*sqrt(log(6p N^2)/n)]";
  } else {
    throw InvalidInput("--theorem must be one of T1, T2, T3, Cor1, T4");
  }

  if (a.explain) {
    std::cerr << "theorem: " << a.theorem << "\n"
              << "formula: " << formula << "\n"
              << "inputs: B_Y=" << format_real(a.label_bound)
              << " B_X=" << format_real(a.feature_bound) << " p=" << a.p;
    if (a.theorem == "T1")
      std::cerr << " n_star=" << (a.n_star > 0 ? a.n_star : a.n);
    else
      std::cerr << " n=" << a.n;
    if (a.theorem == "T4")
      std::cerr << " N=" << a.total_count;
    else
      std::cerr << " delta=" << format_real(a.delta);
    if (a.theorem == "T1") std::cerr << " gamma=" << format_real(a.gamma);
    std::cerr << "\n";
  }
  std::cout << format_real(value) << "\n";
  return 0;
}

struct FitArgs {
  std::string dataset_path;
  std::string variant = "semisupervised";
  std::string lambda_text = "auto";
  std::optional<std::string> output_path;
  std::optional<std::string> sigma_path;
  double delta = 0.1;
  double feature_bound = 0.0;  // 0 means infer
  double label_bound = 0.0;
  bool center = false;
  bool well_specified = false;
  double tol = 1e-8;
  int max_sweeps = 100000;
};

int run_fit(const FitArgs& a) {
  PartiallyLabeledDataset data = load_dataset(a.dataset_path);
  Json center_info;
  if (a.center) {
    auto result = center_scale(data);
    data = std::move(result.data);
    center_info["feature_offset"] = std::vector<double>(
        result.transform.feature_offset.data(),
        result.transform.feature_offset.data() +
            result.transform.feature_offset.size());
    center_info["feature_scale"] = std::vector<double>(
        result.transform.feature_scale.data(),
        result.transform.feature_scale.data() +
            result.transform.feature_scale.size());
    center_info["label_offset"] = result.transform.label_offset;
    center_info["labels_scaled"] = result.transform.labels_scaled;
  }

  EstimatorVariant variant;
  variant.kind = estimator_kind_from_string(a.variant);
  if (variant.kind == EstimatorKind::known_sigma) {
    if (!a.sigma_path)
      throw InvalidInput("--sigma is required for variant known_sigma");
    variant.sigma = load_square_matrix(*a.sigma_path);
  }

  double lambda = 0.0;
  std::string lambda_mode = "explicit";
  std::string theorem_used;
  bool bounds_inferred = false;
  if (a.lambda_text == "auto") {
    lambda_mode = "auto";
    BoundInputs in;
    in.n = data.labeled_count();
    in.total_count = data.total_count();
    in.m = data.unlabeled_count();
    in.p = static_cast<int>(data.dimension());
    in.delta = a.delta;
    const Bounds bounds = (a.feature_bound > 0 && a.label_bound > 0)
                              ? Bounds{a.feature_bound, a.label_bound, false}
                              : data.inferred_bounds();
    bounds_inferred = bounds.inferred;
    in.feature_bound = bounds.feature_bound;
    in.label_bound = bounds.label_bound;
    switch (variant.kind) {
      case EstimatorKind::transductive:
      case EstimatorKind::transductive_projected:
        theorem_used = "T1";
        lambda = lambda_transductive(in);
        break;
      case EstimatorKind::semisupervised:
        theorem_used = a.well_specified ? "T2" : "T3";
        lambda = a.well_specified ? lambda_semisup_wellspec(in)
                                  : lambda_semisup_misspec(in);
        break;
      default:
        throw InvalidInput("--lambda auto is defined only for transductive, "
                           "transductive_projected and semisupervised; pass "
                           "an explicit --lambda for variant " + a.variant);
    }
  } else {
    lambda = detail::config_real("--lambda", a.lambda_text);
    if (!(lambda > 0)) throw InvalidInput("--lambda must be > 0");
  }

  const PenalizedQuadraticProblem prob = build_problem(data, variant, lambda);
  const Solution sol = solve(prob, a.tol, a.max_sweeps);

  Json j;
  j["dataset"] = a.dataset_path;
  j["n"] = data.labeled_count();
  j["N"] = data.total_count();
  j["p"] = data.dimension();
  j["variant"] = a.variant;
  j["lambda"] = lambda;
  j["lambda_mode"] = lambda_mode;
  if (!theorem_used.empty()) {
    j["theorem_used"] = theorem_used;
    j["bounds_inferred"] = bounds_inferred;
  }
  if (a.center) j["center_scale"] = center_info;
  j["beta_hat"] =
      std::vector<double>(sol.beta.data(), sol.beta.data() + sol.beta.size());
  j["kkt_residual"] = sol.kkt_residual;
  j["objective"] = sol.objective;
  j["sweeps"] = sol.sweeps;
  j["converged"] = sol.converged;
  emit(j, a.output_path);
  return sol.converged ? 0 : 1;
}

struct ConstantsArgs {
  std::optional<std::string> dataset_path;
  std::optional<std::string> matrix_path;
  std::string scope = "all";
  std::string support_text;
  double c = 3.0;
  std::string kind = "compatibility";
  int starts = 8;
  std::optional<std::string> output_path;
};

int run_constants(const ConstantsArgs& a) {
  Matrix m;
  if (a.matrix_path) {
    m = load_square_matrix(*a.matrix_path);
  } else if (a.dataset_path) {
    const auto data = load_dataset(*a.dataset_path);
    SampleScope scope;
    if (a.scope == "labeled") scope = SampleScope::labeled;
    else if (a.scope == "unlabeled") scope = SampleScope::unlabeled;
    else if (a.scope == "all") scope = SampleScope::all;
    else throw InvalidInput("--scope must be labeled, unlabeled or all");
    m = gram(data, scope).matrix;
  } else {
    throw InvalidInput("constants: pass --dataset or --matrix");
  }
  const IndexSet support = parse_support_list(a.support_text, m.rows());

  ConeConstantReport report;
  if (a.kind == "compatibility") {
    report = compatibility(m, support, a.c);
  } else if (a.kind == "weak" || a.kind == "weak_compatibility") {
    report = weak_compatibility(m, support, a.c);
  } else if (a.kind == "re" || a.kind == "restricted_eigenvalue") {
    report = restricted_eigenvalue(m, support, a.c, a.starts);
  } else {
    throw InvalidInput("--kind must be compatibility, weak or re");
  }
  emit(to_json(report), a.output_path);
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  std::optional<std::string> output_path;
  std::optional<std::string> csv_path;
  int jobs = 1;
  bool verify = false;
};

int run_simulate(const SimulateArgs& a) {
  const ExperimentConfig cfg = load_config(a.config_path);
  if (a.jobs < 1) throw InvalidInput("--jobs must be >= 1");

  if (cfg.is_benefit()) {
    const BenefitReport report = run_benefit(cfg, a.jobs);
    emit(to_json(report), a.output_path);
    std::cerr << "benefit: median semisupervised "
              << format_real(report.median_semisupervised)
              << " vs supervised " << format_real(report.median_supervised)
              << (report.pass ? " PASS" : " FAIL") << "\n";
    if (a.verify) return report.pass ? 0 : 2;
    return 0;
  }

  const CoverageReport report =
      run_monte_carlo(cfg, cfg.trials, cfg.master_seed, a.jobs);
  if (a.csv_path) {
    std::string csv = trial_csv_header() + "\n";
    for (const auto& trial : report.trial_reports)
      csv += trial_csv_row(trial) + "\n";
    write_file_atomically(*a.csv_path, csv);
  }
  emit(to_json(report), a.output_path);
  std::cerr << cfg.experiment << ": coverage " << format_real(report.coverage)
            << " vs threshold "
            << format_real(1.0 - report.delta - report.slack)
            << (report.pass ? " PASS" : " FAIL") << "\n";
  if (a.verify) return report.pass ? 0 : 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-supervised and transductive lasso toolkit"};
  app.require_subcommand(1);

  LambdaArgs lambda_args;
  auto* lambda_cmd =
      app.add_subcommand("lambda", "evaluate a tuning-parameter formula");
  lambda_cmd->add_option("--theorem", lambda_args.theorem,
                         "bound id: T1, T2, T3, Cor1, T4")->required();
  lambda_cmd->add_option("--by", lambda_args.label_bound, "label bound B_Y");
  lambda_cmd->add_option("--bx", lambda_args.feature_bound, "feature bound B_X");
  lambda_cmd->add_option("--n", lambda_args.n, "labeled sample size");
  lambda_cmd->add_option("--nstar", lambda_args.n_star, "min(n, N - n)");
  lambda_cmd->add_option("--N", lambda_args.total_count, "overall sample size");
  lambda_cmd->add_option("--p", lambda_args.p, "dimension")->required();
  lambda_cmd->add_option("--delta", lambda_args.delta, "tolerance level");
  lambda_cmd->add_option("--gamma", lambda_args.gamma, "cone parameter (> 1)");
  lambda_cmd->add_flag("--explain", lambda_args.explain,
                       "print the formula and its inputs to stderr");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit an estimator on a CSV dataset");
  fit_cmd->add_option("--dataset", fit_args.dataset_path, "dataset CSV path")
      ->required();
  fit_cmd->add_option("--variant", fit_args.variant,
                      "supervised | transductive | transductive_projected | "
                      "semisupervised | known_sigma | alquier");
  fit_cmd->add_option("--lambda", fit_args.lambda_text,
                      "penalty level, or 'auto'");
  fit_cmd->add_option("--output", fit_args.output_path, "write JSON here");
  fit_cmd->add_option("--sigma", fit_args.sigma_path,
                      "CSV matrix for known_sigma");
  fit_cmd->add_option("--delta", fit_args.delta, "tolerance for auto lambda");
  fit_cmd->add_option("--bx", fit_args.feature_bound,
                      "feature bound for auto lambda (inferred if omitted)");
  fit_cmd->add_option("--by", fit_args.label_bound,
                      "label bound for auto lambda (inferred if omitted)");
  fit_cmd->add_flag("--center-scale", fit_args.center,
                    "center/scale features and center labels first");
  fit_cmd->add_flag("--well-specified", fit_args.well_specified,
                    "auto lambda uses the well-specified formula");
  fit_cmd->add_option("--tol", fit_args.tol, "KKT tolerance");
  fit_cmd->add_option("--max-sweeps", fit_args.max_sweeps, "sweep limit");

  ConstantsArgs constants_args;
  auto* constants_cmd =
      app.add_subcommand("constants", "compute a cone constant");
  constants_cmd->add_option("--dataset", constants_args.dataset_path,
                            "dataset CSV path");
  constants_cmd->add_option("--matrix", constants_args.matrix_path,
                            "square matrix CSV path");
  constants_cmd->add_option("--scope", constants_args.scope,
                            "labeled | unlabeled | all (with --dataset)");
  constants_cmd->add_option("--support", constants_args.support_text,
                            "1-based indices, e.g. 1,2,5")->required();
  constants_cmd->add_option("--c", constants_args.c, "cone parameter");
  constants_cmd->add_option("--kind", constants_args.kind,
                            "compatibility | weak | re");
  constants_cmd->add_option("--starts", constants_args.starts,
                            "multi-starts for kind re");
  constants_cmd->add_option("--output", constants_args.output_path,
                            "write JSON here");

  SimulateArgs simulate_args;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "run a Monte Carlo campaign");
  simulate_cmd->add_option("--config", simulate_args.config_path,
                           "experiment config path")->required();
  simulate_cmd->add_option("--output", simulate_args.output_path,
                           "write the JSON report here");
  simulate_cmd->add_option("--csv", simulate_args.csv_path,
                           "write per-trial CSV rows here");
  simulate_cmd->add_option("--jobs", simulate_args.jobs,
                           "concurrent trials (output independent of this)");

  SimulateArgs verify_args;
  verify_args.verify = true;
  auto* verify_cmd = app.add_subcommand(
      "verify", "simulate and exit 0/2 on coverage pass/fail");
  verify_cmd->add_option("--config", verify_args.config_path,
                         "experiment config path")->required();
  verify_cmd->add_option("--output", verify_args.output_path,
                         "write the JSON report here");
  verify_cmd->add_option("--csv", verify_args.csv_path,
                         "write per-trial CSV rows here");
  verify_cmd->add_option("--jobs", verify_args.jobs, "concurrent trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (lambda_cmd->parsed()) return run_lambda(lambda_args);
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (constants_cmd->parsed()) return run_constants(constants_args);
    if (simulate_cmd->parsed()) return run_simulate(simulate_args);
    if (verify_cmd->parsed()) return run_simulate(verify_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
