#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "agendascope/bspline.hpp"
#include "agendascope/covariates.hpp"
#include "agendascope/formula.hpp"

namespace agendascope {

using CovariateValue = std::variant<double, std::string>;
using CovariateAssignment = std::map<std::string, CovariateValue, std::less<>>;

// How one formula term maps raw covariate values onto design columns.
struct TermEncoding {
  FormulaTerm term;          // resolved (never kAuto)
  std::size_t first_column;  // index into the design matrix
  std::size_t width;         // number of columns contributed

  // kLinear: standardized as (x - center) / scale.
  double center = 0.0;
  double scale = 1.0;
  // kSpline
  std::optional<BSplineBasis> basis;
  // kCategorical: all observed levels sorted; levels[0] is the reference.
  std::vector<std::string> levels;
};

// Covariate design for topic prevalence. Column 0 is the intercept.
struct PrevalenceDesign {
  Eigen::MatrixXd X;
  std::vector<std::string> column_names;
  std::vector<TermEncoding> encodings;
  std::vector<std::string> row_ids;       // doc_id of each design row
  std::vector<std::size_t> source_rows;   // row of each design row in the covariate table
  std::vector<std::string> dropped_rows;  // doc_ids dropped for missing values

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }

  const TermEncoding* encoding(std::string_view name) const;

  // Design row for an explicit assignment of every formula covariate.
  // Numeric covariates take double values, categorical ones strings.
  Eigen::RowVectorXd encode(const CovariateAssignment& values) const;

  // Means (raw scale) of numeric covariates and modes of categorical ones
  // over the design rows; ties in the mode go to the alphabetically first level.
  CovariateAssignment reference_values() const;
  // Raw covariate values of design row `row`.
  CovariateAssignment observed_values(std::size_t row) const;

  // Full B-spline basis (including the function dropped from X) for a spline
  // term, one row per design row. Rows sum to one.
  Eigen::MatrixXd spline_full_basis(std::string_view name) const;

  // Raw values retained per covariate, aligned with design rows.
  std::map<std::string, std::vector<CovariateValue>, std::less<>> raw;
};

// Builds the design matrix: intercept, standardized linear columns, cubic
// B-spline blocks with `df` columns, and treatment-coded dummies (first level
// alphabetically is the reference). Rows with a missing value in any
// referenced column are dropped and listed in dropped_rows.
// Throws UnknownCovariate, InsufficientData (rows < columns + 2).
PrevalenceDesign build_design(const Formula& formula, const CovariateTable& covs);

}  // namespace agendascope
