#include "confsets/cli.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <variant>

#include "CLI11.hpp"

#include "confsets/calibrate.hpp"
#include "confsets/coverage.hpp"
#include "confsets/io.hpp"
#include "confsets/lasso.hpp"
#include "confsets/model.hpp"
#include "confsets/parallel.hpp"
#include "confsets/shapes.hpp"
#include "confsets/simulate.hpp"
#include "confsets/special.hpp"

namespace confsets {

namespace {

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<long>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<long>(i)] = v[i];
  return out;
}

Json json_double_list(const std::vector<double>& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

void emit_json(const std::string& path, const Json& j, std::ostream& out) {
  if (path.empty())
    out << j.dump(2) << '\n';
  else
    write_json_file(path, j);
}

// ---- shared input blocks ----

// Either a design matrix (n and the Gram matrix come from it) or a Gram
// matrix file plus an explicit --n where a sample size is needed.
struct GramSource {
  std::string design_path;
  std::string gram_path;
  long n = 0;
};

void add_gram_flags(CLI::App* cmd, GramSource& src, bool design_allowed = true) {
  auto* gram = cmd->add_option("--gram", src.gram_path,
                               "CSV file with the p x p scaled Gram matrix X'X/n");
  if (design_allowed) {
    auto* design =
        cmd->add_option("--design", src.design_path, "CSV file with the n x p design matrix");
    design->excludes(gram);
    gram->excludes(design);
  }
  cmd->add_option("--n", src.n, "sample size (required with --gram when the regime needs one)");
}

struct LoadedGram {
  GramData gram;
  long n = 0;        // 0 when unknown
  Json config_echo;  // how the matrix was obtained
};

LoadedGram load_gram(const GramSource& src, bool need_n) {
  if (src.design_path.empty() == src.gram_path.empty())
    throw std::invalid_argument("exactly one of --design and --gram is required");
  Json echo;
  GramData gram = [&] {
    if (!src.design_path.empty()) {
      const Eigen::MatrixXd X = load_csv_matrix(src.design_path);
      if (X.rows() < X.cols()) throw std::invalid_argument("design must have n >= p");
      echo["design"] = src.design_path;
      return GramData::from_matrix((X.transpose() * X) / static_cast<double>(X.rows()));
    }
    echo["gram"] = src.gram_path;
    return GramData::from_matrix(load_csv_matrix(src.gram_path));
  }();
  long n = src.n;
  if (!src.design_path.empty()) {
    const Eigen::MatrixXd X = load_csv_matrix(src.design_path);
    if (n != 0 && n != X.rows())
      throw std::invalid_argument("--n contradicts the design row count");
    n = X.rows();
  }
  if (need_n && n < 1)
    throw std::invalid_argument("--n is required (finite-sample tuning needs a sample size)");
  if (n != 0) echo["n"] = n;
  return LoadedGram{std::move(gram), n, std::move(echo)};
}

struct TuningFlags {
  std::vector<double> lambda;
  bool conservative = false;
};

void add_tuning_flags(CLI::App* cmd, TuningFlags& tf, bool allow_conservative) {
  cmd->add_option("--lambda", tf.lambda, "per-coordinate penalty weights")
      ->delimiter(',')
      ->required();
  if (allow_conservative)
    cmd->add_flag("--conservative", tf.conservative,
                  "treat --lambda as the limit of lambda_n / sqrt(n) instead of raw penalties");
}

TuningVector build_tuning(const TuningFlags& tf, long n) {
  if (tf.conservative) return TuningVector::conservative(to_vec(tf.lambda));
  return TuningVector::finite_sample(to_vec(tf.lambda), n);
}

Json tuning_echo(const TuningFlags& tf) {
  Json echo{{"lambda", json_double_list(tf.lambda)}};
  echo["regime"] = tf.conservative ? "conservative_limit" : "finite_sample";
  return echo;
}

ConfidenceShape load_shape_arg(const std::string& shape_file, double k, const GramData& gram) {
  const bool have_k = std::isfinite(k);
  if (shape_file.empty() == !have_k)
    throw std::invalid_argument("exactly one of --shape-file and --k is required");
  if (!shape_file.empty()) {
    const Json j = read_json_file(shape_file);
    // accept a bare shape object or a calibration report carrying one
    if (j.contains("type")) return shape_from_json(j);
    if (j.contains("result") && j["result"].contains("shape"))
      return shape_from_json(j["result"]["shape"]);
    if (j.contains("shape")) return shape_from_json(j["shape"]);
    throw std::invalid_argument(shape_file + ": no shape found");
  }
  return Ellipse(gram, k);
}

// ---- subcommand configs ----

struct SolveCfg {
  std::string design_path;
  std::string response_path;
  std::vector<double> lambda;
  double sigma = 1.0;
  std::string out_path;
};

void run_solve(const SolveCfg& cfg, std::ostream& out) {
  const Eigen::MatrixXd X = load_csv_matrix(cfg.design_path);
  const Eigen::VectorXd y = load_csv_vector(cfg.response_path);
  const LinearModel model(X, y, cfg.sigma);
  const TuningVector tuning = TuningVector::finite_sample(to_vec(cfg.lambda), model.n());
  const LassoSolution sol = solve_lasso(model, tuning);
  const Eigen::VectorXd ls = solve_ls(model);
  const Eigen::VectorXd gap = ls_lasso_gap(model, tuning, sol);

  Json config{{"design", cfg.design_path},
              {"response", cfg.response_path},
              {"lambda", json_double_list(cfg.lambda)},
              {"sigma", cfg.sigma},
              {"n", model.n()},
              {"p", model.p()}};
  Json result{{"lasso", json_lasso(sol)},
              {"ls", json_vector(ls)},
              {"ls_lasso_gap", json_vector(gap)},
              {"condition_number", model.condition_number()}};
  emit_json(cfg.out_path, report_envelope("solve", std::move(config), std::move(result)), out);
}

struct EllipseCfg {
  GramSource src;
  TuningFlags tuning;
  double alpha = 0.05;
  double sigma = 1.0;
  std::string out_path;
};

void run_ellipse(const EllipseCfg& cfg, std::ostream& out) {
  LoadedGram loaded = load_gram(cfg.src, !cfg.tuning.conservative);
  const TuningVector tuning = build_tuning(cfg.tuning, loaded.n);
  const CalibrationResult cal = calibrate_ellipse(loaded.gram, tuning, cfg.sigma, cfg.alpha);
  const double k_ls =
      cfg.sigma * cfg.sigma * chi_square_quantile(1.0 - cfg.alpha, loaded.gram.p());

  Json config = loaded.config_echo;
  config["tuning"] = tuning_echo(cfg.tuning);
  config["alpha"] = cfg.alpha;
  config["sigma"] = cfg.sigma;
  // k_ls is the same calibration with the penalty switched off: the centered
  // ellipse covering the unpenalized estimator with probability 1 - alpha.
  Json result{{"k_ls", k_ls},
              {"k_star", cal.k_star},
              {"calibration", json_calibration(cal)}};
  emit_json(cfg.out_path, report_envelope("ellipse", std::move(config), std::move(result)), out);
}

struct ShapeCfg {
  GramSource src;
  TuningFlags tuning;
  double alpha = 0.05;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::size_t samples = 1000000;
  int directions = 0;
  double membership_tol = -1.0;
  double coverage_tol = 0.002;
  int max_iterations = 80;
  std::string out_path;
};

void run_shape(const ShapeCfg& cfg, std::ostream& out) {
  LoadedGram loaded = load_gram(cfg.src, !cfg.tuning.conservative);
  const TuningVector tuning = build_tuning(cfg.tuning, loaded.n);
  HullCalibrationConfig hc;
  hc.n_samples = cfg.samples;
  hc.seed = cfg.seed;
  hc.coverage_tol = cfg.coverage_tol;
  hc.n_directions = cfg.directions;
  hc.membership_tol = cfg.membership_tol;
  hc.max_iterations = cfg.max_iterations;
  const CalibrationResult cal = calibrate_hull(loaded.gram, tuning, cfg.sigma, cfg.alpha, hc);

  Json config = loaded.config_echo;
  config["tuning"] = tuning_echo(cfg.tuning);
  config["alpha"] = cfg.alpha;
  config["sigma"] = cfg.sigma;
  config["seed"] = cfg.seed;
  config["samples"] = cfg.samples;
  config["directions"] = cfg.directions;
  config["membership_tol"] = cfg.membership_tol;
  config["coverage_tol"] = cfg.coverage_tol;
  emit_json(cfg.out_path,
            report_envelope("shape", std::move(config), json_calibration(cal)), out);
}

struct CoverageCfg {
  GramSource src;
  TuningFlags tuning;
  double sigma = 1.0;
  double k = std::numeric_limits<double>::quiet_NaN();
  std::string shape_file;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t samples = 1000000;
  std::string out_path;
  std::string csv_path;
};

void run_coverage(const CoverageCfg& cfg, std::ostream& out) {
  LoadedGram loaded = load_gram(cfg.src, !cfg.tuning.conservative);
  const TuningVector tuning = build_tuning(cfg.tuning, loaded.n);
  const ConfidenceShape shape = load_shape_arg(cfg.shape_file, cfg.k, loaded.gram);
  if (!exact_coverage_applies(shape, loaded.gram) && !cfg.seed_given)
    throw std::invalid_argument(
        "--seed is required: this shape needs Monte Carlo coverage (seeds are never "
        "auto-generated)");
  const CoverageReport report =
      min_coverage(shape, loaded.gram, tuning, cfg.sigma, McConfig{cfg.samples, cfg.seed});

  Json config = loaded.config_echo;
  config["tuning"] = tuning_echo(cfg.tuning);
  config["sigma"] = cfg.sigma;
  if (!cfg.shape_file.empty()) config["shape_file"] = cfg.shape_file;
  if (std::isfinite(cfg.k)) config["k"] = cfg.k;
  if (cfg.seed_given) config["seed"] = cfg.seed;
  config["samples"] = cfg.samples;
  config["shape"] = json_shape(shape);

  if (!cfg.csv_path.empty()) {
    std::vector<std::string> header;
    for (int j = 0; j < loaded.gram.p(); ++j) header.push_back("d_" + std::to_string(j + 1));
    header.insert(header.end(), {"prob", "stderr", "method"});
    std::vector<std::vector<std::string>> rows;
    for (const auto& entry : report.per_d) {
      std::vector<std::string> row;
      for (int j = 0; j < entry.d.p(); ++j) row.push_back(std::to_string(entry.d[j]));
      row.push_back(format_double(entry.probability));
      row.push_back(format_double(entry.std_error));
      row.push_back(mass_method_name(entry.method));
      rows.push_back(std::move(row));
    }
    write_csv_text_file(cfg.csv_path, header, rows);
  }
  emit_json(cfg.out_path,
            report_envelope("coverage", std::move(config), json_coverage_report(report)), out);
}

struct SimulateCfg {
  std::string mode = "profile";
  GramSource src;
  std::vector<double> lambda;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::size_t reps = 10000;
  // profile mode
  std::vector<double> magnitudes;
  bool no_sqrt_scale = false;
  std::vector<double> beta_point;
  double k = std::numeric_limits<double>::quiet_NaN();
  std::string shape_file;
  // consistent mode
  std::vector<double> lambda_coef;
  double exponent = 0.75;
  double d_scale = 1.5;
  std::vector<long> n_list;
  bool two_point = false;
  std::string out_path;
  std::string csv_path;
};

void run_simulate_profile(const SimulateCfg& cfg, std::ostream& out) {
  if (cfg.lambda.empty())
    throw std::invalid_argument("--lambda is required in profile mode");
  Eigen::MatrixXd X;
  Json config;
  if (!cfg.src.design_path.empty()) {
    X = load_csv_matrix(cfg.src.design_path);
    config["design"] = cfg.src.design_path;
  } else {
    if (cfg.src.gram_path.empty() || cfg.src.n < 1)
      throw std::invalid_argument("profile mode needs --design, or --gram with --n");
    X = replicated_design(load_csv_matrix(cfg.src.gram_path), cfg.src.n);
    config["gram"] = cfg.src.gram_path;
  }
  const long n = X.rows();
  config["n"] = n;
  const GramData gram = GramData::from_matrix((X.transpose() * X) / static_cast<double>(n));
  const TuningVector tuning = TuningVector::finite_sample(to_vec(cfg.lambda), n);
  const ConfidenceShape shape = load_shape_arg(cfg.shape_file, cfg.k, gram);

  GridSpec grid;
  if (!cfg.magnitudes.empty() || !cfg.beta_point.empty()) grid.magnitudes = cfg.magnitudes;
  grid.scale_by_sqrt_n = !cfg.no_sqrt_scale;
  if (!cfg.beta_point.empty()) grid.extra_points.push_back(to_vec(cfg.beta_point));

  const ModelTemplate model{X, cfg.sigma};
  const CoverageProfile profile = coverage_profile(model, tuning, shape, grid, cfg.reps, cfg.seed);

  config["mode"] = "profile";
  config["lambda"] = json_double_list(cfg.lambda);
  config["sigma"] = cfg.sigma;
  config["reps"] = cfg.reps;
  config["seed"] = cfg.seed;
  config["magnitudes"] = json_double_list(grid.magnitudes);
  config["scale_by_sqrt_n"] = grid.scale_by_sqrt_n;
  if (!cfg.beta_point.empty()) config["beta"] = json_double_list(cfg.beta_point);
  if (!cfg.shape_file.empty()) config["shape_file"] = cfg.shape_file;
  if (std::isfinite(cfg.k)) config["k"] = cfg.k;
  config["shape"] = json_shape(shape);

  if (!cfg.csv_path.empty()) {
    const int p = static_cast<int>(X.cols());
    std::vector<std::string> header;
    for (int j = 0; j < p; ++j) header.push_back("beta_" + std::to_string(j + 1));
    header.insert(header.end(), {"coverage", "stderr"});
    std::vector<std::vector<double>> rows;
    for (const auto& pt : profile.points) {
      std::vector<double> row;
      for (int j = 0; j < p; ++j) row.push_back(pt.beta[j]);
      row.push_back(pt.coverage);
      row.push_back(pt.std_error);
      rows.push_back(std::move(row));
    }
    write_csv_file(cfg.csv_path, header, rows);
  }
  emit_json(cfg.out_path, report_envelope("simulate", std::move(config), json_profile(profile)),
            out);
}

void run_simulate_consistent(const SimulateCfg& cfg, std::ostream& out) {
  if (cfg.src.gram_path.empty())
    throw std::invalid_argument("consistent mode needs --gram (the limit Gram matrix)");
  if (cfg.lambda_coef.empty()) throw std::invalid_argument("--lambda-coef is required");
  if (cfg.n_list.empty()) throw std::invalid_argument("--n-list is required");

  ConsistentExperimentConfig exp;
  exp.C = load_csv_matrix(cfg.src.gram_path);
  exp.lambda_coef = to_vec(cfg.lambda_coef);
  exp.lambda_exponent = cfg.exponent;
  exp.d_scale = cfg.d_scale;
  exp.n_list = cfg.n_list;
  exp.reps = cfg.reps;
  exp.seed = cfg.seed;
  exp.sigma = cfg.sigma;
  if (!cfg.magnitudes.empty()) exp.magnitudes = cfg.magnitudes;
  exp.two_point_noise = cfg.two_point;
  const std::vector<ConsistentExperimentRow> rows = consistent_regime_experiment(exp);

  Json config{{"mode", "consistent"},
              {"gram", cfg.src.gram_path},
              {"lambda_coef", json_double_list(cfg.lambda_coef)},
              {"exponent", cfg.exponent},
              {"d_scale", cfg.d_scale},
              {"sigma", cfg.sigma},
              {"reps", cfg.reps},
              {"seed", cfg.seed},
              {"magnitudes", json_double_list(exp.magnitudes)},
              {"two_point_noise", cfg.two_point}};
  Json n_list = Json::array();
  for (long n : cfg.n_list) n_list.push_back(n);
  config["n_list"] = std::move(n_list);

  if (!cfg.csv_path.empty()) {
    const int p = static_cast<int>(exp.lambda_coef.size());
    std::vector<std::string> header{"n", "rate", "d_scale"};
    for (int j = 0; j < p; ++j) header.push_back("beta_" + std::to_string(j + 1));
    header.insert(header.end(), {"coverage", "stderr", "is_boundary"});
    std::vector<std::vector<double>> table;
    for (const auto& row : rows) {
      for (const auto& pt : row.points) {
        std::vector<double> r{static_cast<double>(row.n), row.rate, row.d_scale};
        for (int j = 0; j < p; ++j) r.push_back(pt.beta[j]);
        r.push_back(pt.coverage);
        r.push_back(pt.std_error);
        r.push_back(pt.is_boundary_point ? 1.0 : 0.0);
        table.push_back(std::move(r));
      }
    }
    write_csv_file(cfg.csv_path, header, table);
  }
  emit_json(cfg.out_path,
            report_envelope("simulate", std::move(config), json_consistent_rows(rows)), out);
}

struct ConsistentCfg {
  GramSource src;
  std::vector<double> lambda0;
  double lambda_star = 0.0;
  long n = 0;
  double d_scale = 1.0;
  std::string out_path;
};

void run_consistent(const ConsistentCfg& cfg, std::ostream& out) {
  LoadedGram loaded = load_gram(cfg.src, false);
  if (cfg.n < 1) throw std::invalid_argument("--n is required");
  const ConsistentRegion region =
      consistent_set(loaded.gram, to_vec(cfg.lambda0), cfg.lambda_star, cfg.n, cfg.d_scale);

  Json config = loaded.config_echo;
  config["lambda0"] = json_double_list(cfg.lambda0);
  config["lambda_star"] = cfg.lambda_star;
  config["n"] = cfg.n;
  config["d_scale"] = cfg.d_scale;

  Json vertices = Json::array();
  for (const auto& v : parallelogram_vertices(region.region)) vertices.push_back(json_vector(v));
  Json result{{"rate", region.rate},
              {"d_scale", region.d_scale},
              {"boundary_scale_warning", region.boundary_scale_warning},
              {"region", json_shape(ConfidenceShape{region.region})},
              {"vertices", std::move(vertices)}};
  emit_json(cfg.out_path, report_envelope("consistent", std::move(config), std::move(result)),
            out);
}

struct BoundaryCfg {
  std::vector<std::string> shape_files;
  int points = 512;
  std::string csv_path;
};

void run_boundary(const BoundaryCfg& cfg, std::ostream& out) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t id = 0; id < cfg.shape_files.size(); ++id) {
    const Json j = read_json_file(cfg.shape_files[id]);
    const ConfidenceShape shape =
        j.contains("type") ? shape_from_json(j)
        : j.contains("result") && j["result"].contains("shape")
            ? shape_from_json(j["result"]["shape"])
            : shape_from_json(j.at("shape"));
    std::vector<Eigen::Vector2d> line;
    if (const auto* e = std::get_if<Ellipse>(&shape)) {
      line = ellipse_boundary(*e, cfg.points);
    } else if (const auto* h = std::get_if<HullOfShiftedEllipses>(&shape)) {
      line = hull_boundary(*h);
    } else if (const auto* par = std::get_if<Parallelogram>(&shape)) {
      line = parallelogram_boundary(*par);
    } else {
      throw std::invalid_argument("boundary: point-cloud closures are unbounded");
    }
    for (const auto& pt : line)
      rows.push_back({format_double(pt.x()), format_double(pt.y()), std::to_string(id)});
  }
  const std::vector<std::string> header{"x", "y", "shape_id"};
  if (cfg.csv_path.empty())
    write_csv_text(out, header, rows);
  else
    write_csv_text_file(cfg.csv_path, header, rows);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"confidence sets for the componentwise tuned Lasso"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads (results do not depend on this)")
      ->check(CLI::Range(1u, 256u));

  SolveCfg solve_cfg;
  auto* solve = app.add_subcommand("solve", "Lasso point estimate for one dataset");
  solve->add_option("--design", solve_cfg.design_path, "CSV design matrix")->required();
  solve->add_option("--response", solve_cfg.response_path, "CSV response vector")->required();
  solve->add_option("--lambda", solve_cfg.lambda, "per-coordinate penalties")
      ->delimiter(',')
      ->required();
  solve->add_option("--sigma", solve_cfg.sigma, "noise standard deviation (default 1)");
  solve->add_option("--out", solve_cfg.out_path, "write the JSON report here instead of stdout");

  EllipseCfg ellipse_cfg;
  auto* ellipse = app.add_subcommand(
      "ellipse", "exact minimal-coverage calibration of the Gram ellipse");
  add_gram_flags(ellipse, ellipse_cfg.src);
  add_tuning_flags(ellipse, ellipse_cfg.tuning, true);
  ellipse->add_option("--alpha", ellipse_cfg.alpha, "miscoverage level (default 0.05)");
  ellipse->add_option("--sigma", ellipse_cfg.sigma, "noise standard deviation (default 1)");
  ellipse->add_option("--out", ellipse_cfg.out_path, "JSON report path");

  ShapeCfg shape_cfg;
  auto* shape = app.add_subcommand(
      "shape", "Monte Carlo calibration of the hull of shifted ellipses");
  add_gram_flags(shape, shape_cfg.src);
  add_tuning_flags(shape, shape_cfg.tuning, true);
  shape->add_option("--alpha", shape_cfg.alpha, "miscoverage level (default 0.05)");
  shape->add_option("--sigma", shape_cfg.sigma, "noise standard deviation (default 1)");
  shape->add_option("--seed", shape_cfg.seed, "RNG seed (required; never auto-generated)")
      ->required();
  shape->add_option("--samples", shape_cfg.samples, "Monte Carlo draws per evaluation");
  shape->add_option("--directions", shape_cfg.directions, "support-test direction count");
  shape->add_option("--membership-tol", shape_cfg.membership_tol,
                    "one-sided membership tolerance (default 1e-6 * diameter)");
  shape->add_option("--coverage-tol", shape_cfg.coverage_tol, "calibration stopping tolerance");
  shape->add_option("--max-iterations", shape_cfg.max_iterations, "coverage evaluation budget");
  shape->add_option("--out", shape_cfg.out_path, "JSON report path");

  CoverageCfg coverage_cfg;
  auto* coverage = app.add_subcommand(
      "coverage", "minimal coverage probability of a shape over all sign vectors");
  add_gram_flags(coverage, coverage_cfg.src);
  add_tuning_flags(coverage, coverage_cfg.tuning, true);
  coverage->add_option("--sigma", coverage_cfg.sigma, "noise standard deviation (default 1)");
  coverage->add_option("--k", coverage_cfg.k, "radius of the centered Gram ellipse (exact path)");
  coverage->add_option("--shape-file", coverage_cfg.shape_file,
                       "JSON shape (or report containing one)");
  coverage->add_option("--seed", coverage_cfg.seed,
                       "RNG seed (required for Monte Carlo shapes)");
  coverage->add_option("--samples", coverage_cfg.samples, "Monte Carlo draws");
  coverage->add_option("--out", coverage_cfg.out_path, "JSON report path");
  coverage->add_option("--csv", coverage_cfg.csv_path, "per-sign-vector CSV path");

  SimulateCfg simulate_cfg;
  auto* simulate = app.add_subcommand("simulate", "empirical coverage experiments");
  simulate->add_option("--mode", simulate_cfg.mode, "profile (default) or consistent")
      ->check(CLI::IsMember({"profile", "consistent"}));
  add_gram_flags(simulate, simulate_cfg.src);
  simulate->add_option("--lambda", simulate_cfg.lambda, "raw penalties (profile mode)")
      ->delimiter(',');
  simulate->add_option("--sigma", simulate_cfg.sigma, "noise standard deviation (default 1)");
  simulate->add_option("--seed", simulate_cfg.seed, "RNG seed (required; never auto-generated)")
      ->required();
  simulate->add_option("--reps", simulate_cfg.reps, "replications per grid point");
  simulate->add_option("--magnitudes", simulate_cfg.magnitudes,
                       "grid magnitudes (default 0,0.5,1,2,5,20,100)")
      ->delimiter(',');
  simulate->add_flag("--no-sqrt-scale", simulate_cfg.no_sqrt_scale,
                     "use magnitudes as raw beta values instead of dividing by sqrt(n)");
  simulate->add_option("--beta", simulate_cfg.beta_point, "single true beta (profile mode)")
      ->delimiter(',');
  simulate->add_option("--k", simulate_cfg.k, "centered Gram ellipse radius (profile mode)");
  simulate->add_option("--shape-file", simulate_cfg.shape_file, "JSON shape (profile mode)");
  simulate->add_option("--lambda-coef", simulate_cfg.lambda_coef,
                       "penalty coefficients c_j in lambda_nj = c_j n^kappa (consistent mode)")
      ->delimiter(',');
  simulate->add_option("--exponent", simulate_cfg.exponent,
                       "kappa in lambda_n = c n^kappa (consistent mode, default 0.75)");
  simulate->add_option("--d-scale", simulate_cfg.d_scale,
                       "region scale multiplier d (consistent mode, default 1.5)");
  simulate->add_option("--n-list", simulate_cfg.n_list, "sample sizes (consistent mode)")
      ->delimiter(',');
  simulate->add_flag("--two-point", simulate_cfg.two_point,
                     "centered two-point noise instead of Gaussian (consistent mode)");
  simulate->add_option("--out", simulate_cfg.out_path, "JSON report path");
  simulate->add_option("--csv", simulate_cfg.csv_path, "per-grid-point CSV path");

  ConsistentCfg consistent_cfg;
  auto* consistent = app.add_subcommand(
      "consistent", "the consistent-regime confidence region (scaled parallelogram)");
  add_gram_flags(consistent, consistent_cfg.src);
  consistent->add_option("--lambda0", consistent_cfg.lambda0,
                         "normalized weights lambda_n / lambda*_n (max entry 1)")
      ->delimiter(',')
      ->required();
  consistent->add_option("--lambda-star", consistent_cfg.lambda_star, "penalty scale lambda*_n")
      ->required();
  consistent->add_option("--d-scale", consistent_cfg.d_scale,
                         "region scale multiplier d (default 1)");
  consistent->add_option("--out", consistent_cfg.out_path, "JSON report path");

  BoundaryCfg boundary_cfg;
  auto* boundary = app.add_subcommand("boundary", "boundary polylines of 2-d shapes as CSV");
  boundary->add_option("--shape-file", boundary_cfg.shape_files,
                       "JSON shape files (repeat for overlays; shape_id follows the order)")
      ->required();
  boundary->add_option("--points", boundary_cfg.points, "points per ellipse boundary");
  boundary->add_option("--out", boundary_cfg.csv_path, "CSV path (default stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("confsets");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    set_max_threads(threads);
    if (app.got_subcommand(solve)) {
      run_solve(solve_cfg, out);
    } else if (app.got_subcommand(ellipse)) {
      run_ellipse(ellipse_cfg, out);
    } else if (app.got_subcommand(shape)) {
      run_shape(shape_cfg, out);
    } else if (app.got_subcommand(coverage)) {
      coverage_cfg.seed_given = coverage->count("--seed") > 0;
      run_coverage(coverage_cfg, out);
    } else if (app.got_subcommand(simulate)) {
      if (simulate_cfg.mode == "profile")
        run_simulate_profile(simulate_cfg, out);
      else
        run_simulate_consistent(simulate_cfg, out);
    } else if (app.got_subcommand(consistent)) {
      // --n comes in through the shared gram flags
      consistent_cfg.n = consistent_cfg.src.n;
      run_consistent(consistent_cfg, out);
    } else if (app.got_subcommand(boundary)) {
      run_boundary(boundary_cfg, out);
    }
    return 0;
  } catch (const CsvError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace confsets
