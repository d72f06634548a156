#include "confsets/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace confsets {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t line_no) {
  const std::string_view t = trim(field);
  if (t.empty()) throw CsvError("empty field", line_no);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw CsvError("not a number: '" + std::string(t) + "'", line_no);
  if (!std::isfinite(value)) throw CsvError("non-finite value", line_no);
  return value;
}

}  // namespace

Eigen::MatrixXd parse_csv_matrix(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest = line;
    while (true) {
      const std::size_t comma = rest.find(',');
      row.push_back(parse_field(rest.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw CsvError(name + ": expected " + std::to_string(rows.front().size()) +
                         " fields, got " + std::to_string(row.size()),
                     line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError(name + ": no data rows", line_no == 0 ? 1 : line_no);
  Eigen::MatrixXd m(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  return m;
}

Eigen::MatrixXd load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  return parse_csv_matrix(in, path);
}

Eigen::VectorXd load_csv_vector(const std::string& path) {
  const Eigen::MatrixXd m = load_csv_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw CsvError(path + ": expected a single column (or row)", 1);
}

void write_csv_text(std::ostream& out, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  if (header.empty()) throw std::invalid_argument("write_csv: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

void write_csv_text_file(const std::string& path, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  write_csv_text(out, header, rows);
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<std::string>> text;
  text.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<std::string> r;
    r.reserve(row.size());
    for (double x : row) r.push_back(format_double(x));
    text.push_back(std::move(r));
  }
  write_csv_text(out, header, text);
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  write_csv(out, header, rows);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json json_matrix(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (long i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json json_vector(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (long i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(name + ": expected a matrix");
  const std::size_t n_rows = j.size();
  std::size_t n_cols = 0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.empty())
      throw std::invalid_argument(name + ": expected rows of numbers");
    if (i == 0) n_cols = row.size();
    if (row.size() != n_cols) throw std::invalid_argument(name + ": ragged matrix");
  }
  Eigen::MatrixXd m(static_cast<long>(n_rows), static_cast<long>(n_cols));
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t k = 0; k < n_cols; ++k) {
      const Json& cell = j[i][k];
      if (!cell.is_number()) throw std::invalid_argument(name + ": non-numeric entry");
      m(static_cast<long>(i), static_cast<long>(k)) = cell.get<double>();
    }
  return m;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(name + ": expected a vector");
  Eigen::VectorXd v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(name + ": non-numeric entry");
    v[static_cast<long>(i)] = j[i].get<double>();
  }
  return v;
}

Json json_gram(const GramData& gram) {
  return Json{{"C", json_matrix(gram.C)},
              {"min_eigenvalue", gram.min_eigenvalue},
              {"max_eigenvalue", gram.max_eigenvalue}};
}

GramData gram_from_json(const Json& j) {
  return GramData::from_matrix(matrix_from_json(j.at("C"), "gram.C"));
}

Json json_tuning(const TuningVector& tuning) {
  switch (tuning.regime()) {
    case Regime::FiniteSample:
      return Json{{"regime", "finite_sample"},
                  {"lambda", json_vector(tuning.lambda())},
                  {"n", tuning.n()}};
    case Regime::ConservativeLimit:
      return Json{{"regime", "conservative_limit"}, {"lambda", json_vector(tuning.lambda())}};
    case Regime::ConsistentLimit:
      return Json{{"regime", "consistent_limit"},
                  {"lambda0", json_vector(tuning.lambda0())},
                  {"lambda_star", tuning.lambda_star()}};
  }
  throw std::logic_error("unreachable tuning regime");
}

TuningVector tuning_from_json(const Json& j) {
  const std::string regime = j.at("regime").get<std::string>();
  if (regime == "finite_sample")
    return TuningVector::finite_sample(vector_from_json(j.at("lambda"), "tuning.lambda"),
                                       j.at("n").get<long>());
  if (regime == "conservative_limit")
    return TuningVector::conservative(vector_from_json(j.at("lambda"), "tuning.lambda"));
  if (regime == "consistent_limit")
    return TuningVector::consistent(vector_from_json(j.at("lambda0"), "tuning.lambda0"),
                                    j.at("lambda_star").get<double>());
  throw std::invalid_argument("unknown tuning regime: " + regime);
}

Json json_sign_vector(const SignVector& d) {
  Json arr = Json::array();
  for (int j = 0; j < d.p(); ++j) arr.push_back(d[j]);
  return arr;
}

Json json_lasso(const LassoSolution& sol) {
  Json active = Json::array();
  for (bool a : sol.active_set) active.push_back(a);
  return Json{{"beta_hat", json_vector(sol.beta_hat)},
              {"active_set", std::move(active)},
              {"kkt_gap", json_vector(sol.kkt_gap)},
              {"iterations", sol.iterations},
              {"objective_value", sol.objective_value},
              {"tolerance", sol.tolerance}};
}

Json json_shape(const ConfidenceShape& shape) {
  if (const auto* e = std::get_if<Ellipse>(&shape)) {
    return Json{{"type", "ellipse"},
                {"C", json_matrix(e->C_shape)},
                {"k", e->k},
                {"center", json_vector(e->center)}};
  }
  if (const auto* h = std::get_if<HullOfShiftedEllipses>(&shape)) {
    Json shifts = Json::array();
    for (const auto& s : h->shifts) shifts.push_back(json_vector(s));
    return Json{{"type", "hull_of_shifted_ellipses"},
                {"C", json_matrix(h->C_shape)},
                {"k", h->k},
                {"shifts", std::move(shifts)},
                {"n_directions", h->n_directions()},
                {"tol", h->tol}};
  }
  if (const auto* par = std::get_if<Parallelogram>(&shape)) {
    return Json{{"type", "parallelogram"},
                {"C", json_matrix(par->C_shape)},
                {"bounds", json_vector(par->bounds)},
                {"scale", par->scale}};
  }
  const auto& pc = std::get<PointCloudWithClosure>(shape);
  Json points = Json::array();
  for (const auto& m : pc.points) points.push_back(json_vector(m));
  return Json{{"type", "point_cloud_with_closure"},
              {"C_bar", json_matrix(pc.C_bar)},
              {"points", std::move(points)}};
}

ConfidenceShape shape_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "ellipse") {
    return Ellipse(matrix_from_json(j.at("C"), "ellipse.C"), j.at("k").get<double>(),
                   vector_from_json(j.at("center"), "ellipse.center"));
  }
  if (type == "hull_of_shifted_ellipses") {
    const Json& shifts_json = j.at("shifts");
    if (!shifts_json.is_array()) throw std::invalid_argument("hull.shifts: expected an array");
    std::vector<Eigen::VectorXd> shifts;
    for (const Json& s : shifts_json) shifts.push_back(vector_from_json(s, "hull.shifts"));
    return make_hull_from_shifts(matrix_from_json(j.at("C"), "hull.C"), j.at("k").get<double>(),
                                 std::move(shifts), j.at("n_directions").get<int>(),
                                 j.at("tol").get<double>());
  }
  if (type == "parallelogram") {
    return Parallelogram(matrix_from_json(j.at("C"), "parallelogram.C"),
                         vector_from_json(j.at("bounds"), "parallelogram.bounds"),
                         j.at("scale").get<double>());
  }
  if (type == "point_cloud_with_closure") {
    const Json& points_json = j.at("points");
    if (!points_json.is_array() || points_json.empty())
      throw std::invalid_argument("point_cloud.points: expected a nonempty array");
    std::vector<Eigen::VectorXd> points;
    for (const Json& m : points_json) points.push_back(vector_from_json(m, "point_cloud.points"));
    return PointCloudWithClosure(std::move(points),
                                 matrix_from_json(j.at("C_bar"), "point_cloud.C_bar"));
  }
  throw std::invalid_argument("unknown shape type: " + type);
}

std::string mass_method_name(MassMethod method) {
  return method == MassMethod::Exact ? "exact" : "monte_carlo";
}

Json json_coverage_report(const CoverageReport& report) {
  Json per_d = Json::array();
  for (const auto& entry : report.per_d) {
    per_d.push_back(Json{{"d", json_sign_vector(entry.d)},
                         {"probability", entry.probability},
                         {"std_error", entry.std_error},
                         {"method", mass_method_name(entry.method)}});
  }
  Json argmin = Json::array();
  for (const auto& d : report.argmin_d) argmin.push_back(json_sign_vector(d));
  return Json{{"min_coverage", report.min_coverage},
              {"argmin_d", std::move(argmin)},
              {"method", mass_method_name(report.method)},
              {"mean_sign_convention", report.mean_sign_convention},
              {"n_samples", report.n_samples},
              {"seed", report.seed},
              {"per_d", std::move(per_d)}};
}

Json json_calibration(const CalibrationResult& result) {
  Json history = Json::array();
  for (const auto& [k, cov] : result.history)
    history.push_back(Json{{"k", k}, {"min_coverage", cov}});
  Json d_star = Json::array();
  for (const auto& d : result.d_star) d_star.push_back(json_sign_vector(d));
  return Json{{"k_star", result.k_star},
              {"target", result.target},
              {"achieved", result.achieved},
              {"achieved_std_error", result.achieved_std_error},
              {"iterations", result.iterations},
              {"noncentrality", result.noncentrality},
              {"d_star", std::move(d_star)},
              {"history", std::move(history)},
              {"shape", json_shape(result.shape)}};
}

Json json_empirical(const EmpiricalCoverage& cov) {
  return Json{{"coverage", cov.coverage},
              {"std_error", cov.std_error},
              {"reps", cov.reps},
              {"solver_failures", cov.solver_failures}};
}

Json json_profile(const CoverageProfile& profile) {
  Json points = Json::array();
  for (const auto& pt : profile.points) {
    points.push_back(Json{{"beta", json_vector(pt.beta)},
                          {"coverage", pt.coverage},
                          {"std_error", pt.std_error}});
  }
  return Json{{"reps", profile.reps},
              {"seed", profile.seed},
              {"min_index", profile.min_index},
              {"min_value", profile.min_value},
              {"solver_failures", profile.solver_failures},
              {"points", std::move(points)}};
}

Json json_consistent_rows(const std::vector<ConsistentExperimentRow>& rows) {
  Json arr = Json::array();
  for (const auto& row : rows) {
    Json points = Json::array();
    for (const auto& pt : row.points) {
      points.push_back(Json{{"beta", json_vector(pt.beta)},
                            {"coverage", pt.coverage},
                            {"std_error", pt.std_error},
                            {"is_boundary_point", pt.is_boundary_point}});
    }
    arr.push_back(Json{{"n", row.n},
                       {"rate", row.rate},
                       {"d_scale", row.d_scale},
                       {"worst_coverage", row.worst_coverage},
                       {"worst_beta", json_vector(row.worst_beta)},
                       {"boundary_coverage", row.boundary_coverage},
                       {"solver_failures", row.solver_failures},
                       {"points", std::move(points)}});
  }
  return arr;
}

Json json_condition_check(const ConditionCheckResult& result) {
  Json out{{"holds", result.holds},
           {"m_count", result.m_count},
           {"cone_point_count", result.cone_point_count},
           {"clip_box",
            Json{{"lo", json_vector(result.clip_box.lo)}, {"hi", json_vector(result.clip_box.hi)}}}};
  if (result.counterexample) {
    out["counterexample"] = Json{{"m", json_vector(result.counterexample->m)},
                                 {"d", json_sign_vector(result.counterexample->d)},
                                 {"z", json_vector(result.counterexample->z)}};
  } else {
    out["counterexample"] = nullptr;
  }
  return out;
}

Json json_volume(const VolumeEstimate& vol) {
  return Json{{"volume", vol.volume}, {"std_error", vol.std_error}, {"n_samples", vol.n_samples}};
}

Json json_volume_difference(const VolumeDifference& diff) {
  return Json{{"difference", diff.difference},
              {"std_error", diff.std_error},
              {"volume_a", diff.volume_a},
              {"volume_b", diff.volume_b},
              {"n_samples", diff.n_samples}};
}

Json report_envelope(const std::string& subcommand, Json config, Json result) {
  return Json{{"schema", "confsets/v1"},
              {"subcommand", subcommand},
              {"config", std::move(config)},
              {"result", std::move(result)}};
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& err) {
    throw std::invalid_argument(path + ": " + err.what());
  }
}

}  // namespace confsets
