#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "confsets/calibrate.hpp"
#include "confsets/coverage.hpp"
#include "confsets/lasso.hpp"
#include "confsets/model.hpp"
#include "confsets/shapes.hpp"
#include "confsets/simulate.hpp"

namespace confsets {

/// Insertion-ordered JSON so reports read top-down (schema, config, result)
/// and serialize deterministically.
using Json = nlohmann::ordered_json;

/// %.17g: enough digits to reproduce the double exactly.
std::string format_double(double x);

// ---- CSV ----
//
// Input matrices are headerless numeric CSV: comma separator, '.' decimal
// point, one row per line.  Blank lines are skipped; anything else
// (non-numeric field, ragged row) raises CsvError with the line number.
// Output CSV always carries a header row, LF line endings, and %.17g fields.

Eigen::MatrixXd parse_csv_matrix(std::istream& in, const std::string& name);
Eigen::MatrixXd load_csv_matrix(const std::string& path);
/// Single-column (or single-row) CSV flattened to a vector.
Eigen::VectorXd load_csv_vector(const std::string& path);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows);

/// For tables with non-numeric columns (method names, ids).
void write_csv_text(std::ostream& out, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);
void write_csv_text_file(const std::string& path, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

// ---- JSON ----
//
// Reports are wrapped in a fixed envelope:
//   {"schema": "confsets/v1", "subcommand": ..., "config": ..., "result": ...}
// The config echo always includes every input that influenced the result
// (seed included); nothing environmental (timestamps, host, thread count)
// is ever written, so identical inputs give byte-identical reports.

Json json_matrix(const Eigen::MatrixXd& m);  // array of row arrays
Json json_vector(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& name);
Eigen::VectorXd vector_from_json(const Json& j, const std::string& name);

Json json_gram(const GramData& gram);
GramData gram_from_json(const Json& j);

Json json_tuning(const TuningVector& tuning);
TuningVector tuning_from_json(const Json& j);

Json json_sign_vector(const SignVector& d);
Json json_lasso(const LassoSolution& sol);

/// Tagged union; every variant round-trips through shape_from_json with
/// bit-identical membership behavior.
Json json_shape(const ConfidenceShape& shape);
ConfidenceShape shape_from_json(const Json& j);

std::string mass_method_name(MassMethod method);

Json json_coverage_report(const CoverageReport& report);
Json json_calibration(const CalibrationResult& result);
Json json_empirical(const EmpiricalCoverage& cov);
Json json_profile(const CoverageProfile& profile);
Json json_consistent_rows(const std::vector<ConsistentExperimentRow>& rows);
Json json_condition_check(const ConditionCheckResult& result);
Json json_volume(const VolumeEstimate& vol);
Json json_volume_difference(const VolumeDifference& diff);

Json report_envelope(const std::string& subcommand, Json config, Json result);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace confsets
