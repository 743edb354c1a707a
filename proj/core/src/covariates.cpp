#include "agendascope/covariates.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "agendascope/error.hpp"

namespace agendascope {

bool is_region_code(std::string_view code) {
  return std::find(std::begin(kRegionCodes), std::end(kRegionCodes), code) != std::end(kRegionCodes);
}

CovariateTable CovariateTable::from_records(const std::vector<CovariateRecord>& records) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.doc_id);
  CovariateTable t(std::move(ids));

  auto numeric = [&](std::string name, ColumnKind kind, auto getter) {
    CovariateColumn c{std::move(name), kind, {}, {}};
    for (const auto& r : records) c.numeric.push_back(getter(r));
    t.add_column(std::move(c));
  };
  numeric("gdp_pc", ColumnKind::kNumeric, [](const CovariateRecord& r) { return r.gdp_pc; });
  numeric("population", ColumnKind::kNumeric, [](const CovariateRecord& r) { return r.population; });
  numeric("oda", ColumnKind::kNumeric, [](const CovariateRecord& r) { return r.oda; });
  numeric("polity", ColumnKind::kNumeric, [](const CovariateRecord& r) -> std::optional<double> {
    if (!r.polity) return std::nullopt;
    return static_cast<double>(*r.polity);
  });
  numeric("conflict", ColumnKind::kBoolean, [](const CovariateRecord& r) -> std::optional<double> {
    if (!r.conflict) return std::nullopt;
    return *r.conflict ? 1.0 : 0.0;
  });
  CovariateColumn region{"region", ColumnKind::kCategorical, {}, {}};
  for (const auto& r : records) region.categorical.push_back(r.region);
  t.add_column(std::move(region));
  return t;
}

void CovariateTable::add_column(CovariateColumn column) {
  std::size_t n = column.kind == ColumnKind::kCategorical ? column.categorical.size()
                                                          : column.numeric.size();
  if (n != doc_ids_.size())
    throw InvalidArgument("column '" + column.name + "' has " + std::to_string(n) +
                          " rows, table has " + std::to_string(doc_ids_.size()));
  if (find(column.name)) throw InvalidArgument("duplicate column '" + column.name + "'");
  columns_.push_back(std::move(column));
}

const CovariateColumn* CovariateTable::find(std::string_view name) const {
  for (const auto& c : columns_)
    if (c.name == name) return &c;
  return nullptr;
}

const CovariateColumn& CovariateTable::column(std::string_view name) const {
  if (const auto* c = find(name)) return *c;
  throw UnknownCovariate("unknown covariate '" + std::string(name) + "'");
}

std::optional<std::size_t> CovariateTable::row_of(std::string_view doc_id) const {
  for (std::size_t i = 0; i < doc_ids_.size(); ++i)
    if (doc_ids_[i] == doc_id) return i;
  return std::nullopt;
}

CovariateTable CovariateTable::select_rows(const std::vector<std::size_t>& rows) const {
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (auto r : rows) ids.push_back(doc_ids_.at(r));
  CovariateTable out(std::move(ids));
  for (const auto& c : columns_) {
    CovariateColumn nc{c.name, c.kind, {}, {}};
    for (auto r : rows) {
      if (c.kind == ColumnKind::kCategorical)
        nc.categorical.push_back(c.categorical[r]);
      else
        nc.numeric.push_back(c.numeric[r]);
    }
    out.columns_.push_back(std::move(nc));
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

CovariateTable parse_covariate_csv(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw MetadataParseError(line_no, "missing header");

  static const char* kRequired[] = {"doc_id", "gdp_pc", "population", "oda",
                                    "polity", "conflict", "region"};
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!index.emplace(header[i], i).second)
      throw MetadataParseError(line_no, "duplicate header column '" + header[i] + "'");
  }
  for (const char* r : kRequired)
    if (!index.contains(r)) throw MetadataParseError(line_no, std::string("missing column '") + r + "'");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw MetadataParseError(line_no, "expected " + std::to_string(header.size()) +
                                            " fields, found " + std::to_string(fields.size()));
    rows.push_back(std::move(fields));
    row_lines.push_back(line_no);
  }

  std::vector<std::string> ids;
  std::map<std::string, std::size_t> seen;
  const std::size_t id_col = index["doc_id"];
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& id = rows[r][id_col];
    if (id.empty()) throw MetadataParseError(row_lines[r], "empty doc_id");
    if (!seen.emplace(id, r).second)
      throw MetadataParseError(row_lines[r], "duplicate doc_id '" + id + "'");
    ids.push_back(id);
  }
  CovariateTable table(std::move(ids));

  auto numeric_column = [&](const std::string& name, ColumnKind kind, auto validate) {
    CovariateColumn c{name, kind, {}, {}};
    const std::size_t col = index[name];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& f = rows[r][col];
      if (f.empty()) {
        c.numeric.emplace_back();
        continue;
      }
      auto v = parse_double(f);
      if (!v) throw MetadataParseError(row_lines[r], name + " value '" + f + "' is not a number");
      validate(row_lines[r], *v);
      c.numeric.emplace_back(*v);
    }
    table.add_column(std::move(c));
  };

  numeric_column("gdp_pc", ColumnKind::kNumeric, [](std::size_t ln, double v) {
    if (v < 0) throw MetadataParseError(ln, "gdp_pc must be >= 0");
  });
  numeric_column("population", ColumnKind::kNumeric, [](std::size_t ln, double v) {
    if (v <= 0) throw MetadataParseError(ln, "population must be > 0");
  });
  numeric_column("oda", ColumnKind::kNumeric, [](std::size_t, double) {});
  numeric_column("polity", ColumnKind::kNumeric, [](std::size_t ln, double v) {
    if (v != std::floor(v) || v < -10 || v > 10)
      throw MetadataParseError(ln, "polity must be an integer in [-10, 10]");
  });
  numeric_column("conflict", ColumnKind::kBoolean, [](std::size_t ln, double v) {
    if (v != 0.0 && v != 1.0) throw MetadataParseError(ln, "conflict must be 0 or 1");
  });

  {
    CovariateColumn c{"region", ColumnKind::kCategorical, {}, {}};
    const std::size_t col = index["region"];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& f = rows[r][col];
      if (f.empty()) {
        c.categorical.emplace_back();
        continue;
      }
      if (!is_region_code(f)) throw MetadataParseError(row_lines[r], "unknown region code '" + f + "'");
      c.categorical.emplace_back(f);
    }
    table.add_column(std::move(c));
  }

  // Extra columns, in header order.
  for (std::size_t col = 0; col < header.size(); ++col) {
    const auto& name = header[col];
    if (std::find(std::begin(kRequired), std::end(kRequired), name) != std::end(kRequired)) continue;
    bool all_numeric = true;
    for (const auto& row : rows)
      if (!row[col].empty() && !parse_double(row[col])) all_numeric = false;
    CovariateColumn c{name, all_numeric ? ColumnKind::kNumeric : ColumnKind::kCategorical, {}, {}};
    for (const auto& row : rows) {
      const auto& f = row[col];
      if (all_numeric)
        c.numeric.push_back(f.empty() ? std::nullopt : parse_double(f));
      else
        c.categorical.push_back(f.empty() ? std::nullopt : std::optional<std::string>(f));
    }
    table.add_column(std::move(c));
  }
  return table;
}

CovariateTable load_covariate_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MetadataParseError(0, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_covariate_csv(ss.str());
}

}  // namespace agendascope
