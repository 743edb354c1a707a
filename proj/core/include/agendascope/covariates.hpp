#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agendascope {

// Region codes accepted in the `region` column.
inline constexpr std::string_view kRegionCodes[] = {"EAS", "ECS", "LCN", "MEA", "NAC", "SAS", "SSA"};

bool is_region_code(std::string_view code);

// One row of the standard covariate file. Missing values are std::nullopt.
struct CovariateRecord {
  std::string doc_id;
  std::optional<double> gdp_pc;
  std::optional<double> population;
  std::optional<double> oda;
  std::optional<int> polity;
  std::optional<bool> conflict;
  std::optional<std::string> region;
};

enum class ColumnKind { kNumeric, kBoolean, kCategorical };

struct CovariateColumn {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Exactly one of these is populated, according to `kind`
  // (booleans are stored as 0/1 in `numeric`).
  std::vector<std::optional<double>> numeric;
  std::vector<std::optional<std::string>> categorical;

  bool is_missing(std::size_t row) const {
    return kind == ColumnKind::kCategorical ? !categorical[row].has_value()
                                            : !numeric[row].has_value();
  }
};

// Column-oriented document metadata keyed by doc_id. Missing values are kept
// as explicit markers; rows are dropped only when a design matrix is built.
class CovariateTable {
 public:
  CovariateTable() = default;
  explicit CovariateTable(std::vector<std::string> doc_ids) : doc_ids_(std::move(doc_ids)) {}

  static CovariateTable from_records(const std::vector<CovariateRecord>& records);

  std::size_t rows() const { return doc_ids_.size(); }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::vector<CovariateColumn>& columns() const { return columns_; }

  // Throws InvalidArgument on length mismatch or duplicate name.
  void add_column(CovariateColumn column);

  const CovariateColumn* find(std::string_view name) const;
  const CovariateColumn& column(std::string_view name) const;  // throws UnknownCovariate

  std::optional<std::size_t> row_of(std::string_view doc_id) const;

  // Rows reordered/filtered by index.
  CovariateTable select_rows(const std::vector<std::size_t>& rows) const;

 private:
  std::vector<std::string> doc_ids_;
  std::vector<CovariateColumn> columns_;
};

// Parses the comma-delimited covariate file. The header must contain
// doc_id,gdp_pc,population,oda,polity,conflict,region (any order); extra
// columns are accepted and typed numeric when every present value parses as
// a number, categorical otherwise. Empty fields are missing values.
// Throws MetadataParseError naming the offending line.
CovariateTable load_covariate_csv(const std::filesystem::path& path);
CovariateTable parse_covariate_csv(std::string_view content);

}  // namespace agendascope
