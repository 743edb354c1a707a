#include "agendascope/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "agendascope/error.hpp"

namespace agendascope {

const TermEncoding* PrevalenceDesign::encoding(std::string_view name) const {
  for (const auto& e : encodings)
    if (e.term.name == name) return &e;
  return nullptr;
}

namespace {

double as_number(const CovariateValue& v, const std::string& name) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw InvalidArgument("covariate '" + name + "' expects a numeric value");
}

const std::string& as_level(const CovariateValue& v, const std::string& name) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw InvalidArgument("covariate '" + name + "' expects a categorical level");
}

void encode_into(const TermEncoding& e, const CovariateValue& value,
                 Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  const auto& name = e.term.name;
  switch (e.term.kind) {
    case TermKind::kLinear:
      row(static_cast<Eigen::Index>(e.first_column)) = (as_number(value, name) - e.center) / e.scale;
      break;
    case TermKind::kSpline: {
      auto b = e.basis->evaluate(as_number(value, name));
      for (std::size_t j = 0; j < b.size(); ++j) row(static_cast<Eigen::Index>(e.first_column + j)) = b[j];
      break;
    }
    case TermKind::kCategorical: {
      const auto& level = as_level(value, name);
      auto it = std::find(e.levels.begin(), e.levels.end(), level);
      if (it == e.levels.end()) throw InvalidArgument("unknown level '" + level + "' for '" + name + "'");
      for (std::size_t j = 0; j < e.width; ++j) row(static_cast<Eigen::Index>(e.first_column + j)) = 0.0;
      auto idx = static_cast<std::size_t>(it - e.levels.begin());
      if (idx > 0) row(static_cast<Eigen::Index>(e.first_column + idx - 1)) = 1.0;
      break;
    }
    case TermKind::kAuto:
      throw InvalidArgument("unresolved formula term '" + name + "'");
  }
}

}  // namespace

Eigen::RowVectorXd PrevalenceDesign::encode(const CovariateAssignment& values) const {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(cols()));
  row(0) = 1.0;
  for (const auto& e : encodings) {
    auto it = values.find(e.term.name);
    if (it == values.end()) throw InvalidArgument("no value supplied for covariate '" + e.term.name + "'");
    encode_into(e, it->second, row);
  }
  return row;
}

CovariateAssignment PrevalenceDesign::reference_values() const {
  CovariateAssignment out;
  for (const auto& e : encodings) {
    const auto& vals = raw.at(e.term.name);
    if (e.term.kind == TermKind::kCategorical) {
      std::map<std::string, std::size_t> counts;
      for (const auto& v : vals) ++counts[std::get<std::string>(v)];
      std::string best;
      std::size_t best_n = 0;
      for (const auto& [level, n] : counts)
        if (n > best_n) {
          best = level;
          best_n = n;
        }
      out.emplace(e.term.name, best);
    } else {
      double sum = 0.0;
      for (const auto& v : vals) sum += std::get<double>(v);
      out.emplace(e.term.name, sum / static_cast<double>(vals.size()));
    }
  }
  return out;
}

CovariateAssignment PrevalenceDesign::observed_values(std::size_t row) const {
  CovariateAssignment out;
  for (const auto& [name, vals] : raw) out.emplace(name, vals.at(row));
  return out;
}

Eigen::MatrixXd PrevalenceDesign::spline_full_basis(std::string_view name) const {
  const auto* e = encoding(name);
  if (!e || e->term.kind != TermKind::kSpline)
    throw InvalidArgument("'" + std::string(name) + "' is not a spline term");
  const auto& vals = raw.at(e->term.name);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(vals.size()), static_cast<Eigen::Index>(e->basis->full_size()));
  for (std::size_t r = 0; r < vals.size(); ++r) {
    auto b = e->basis->evaluate_full(std::get<double>(vals[r]));
    for (std::size_t j = 0; j < b.size(); ++j) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = b[j];
  }
  return out;
}

PrevalenceDesign build_design(const Formula& formula, const CovariateTable& covs) {
  const Formula bound = bind_formula(formula, covs);

  PrevalenceDesign design;
  for (std::size_t r = 0; r < covs.rows(); ++r) {
    bool complete = true;
    for (const auto& t : bound.terms)
      if (covs.column(t.name).is_missing(r)) complete = false;
    if (complete)
      design.source_rows.push_back(r);
    else
      design.dropped_rows.push_back(covs.doc_ids()[r]);
  }
  for (auto r : design.source_rows) design.row_ids.push_back(covs.doc_ids()[r]);
  const std::size_t n = design.source_rows.size();

  design.column_names.push_back("(Intercept)");
  std::size_t next_col = 1;
  for (const auto& t : bound.terms) {
    const auto& col = covs.column(t.name);
    TermEncoding e{t, next_col, 0, 0.0, 1.0, std::nullopt, {}};
    auto& raw = design.raw[t.name];
    std::vector<double> values;
    if (col.kind == ColumnKind::kCategorical) {
      std::set<std::string> levels;
      for (auto r : design.source_rows) {
        levels.insert(*col.categorical[r]);
        raw.emplace_back(*col.categorical[r]);
      }
      e.levels.assign(levels.begin(), levels.end());
      e.width = e.levels.empty() ? 0 : e.levels.size() - 1;
      for (std::size_t j = 1; j < e.levels.size(); ++j) design.column_names.push_back(t.name + ":" + e.levels[j]);
    } else {
      for (auto r : design.source_rows) {
        values.push_back(*col.numeric[r]);
        raw.emplace_back(*col.numeric[r]);
      }
      if (t.kind == TermKind::kSpline) {
        if (n == 0) throw InsufficientData("no complete rows for spline term '" + t.name + "'");
        e.basis = BSplineBasis::for_regression(values, t.df);
        e.width = e.basis->df();
        for (std::size_t j = 1; j <= e.width; ++j)
          design.column_names.push_back("s(" + t.name + ")" + std::to_string(j));
      } else {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean = n ? mean / static_cast<double>(n) : 0.0;
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        e.center = mean;
        e.scale = sd > 0.0 ? sd : 1.0;
        e.width = 1;
        design.column_names.push_back(t.name);
      }
    }
    next_col += e.width;
    design.encodings.push_back(std::move(e));
  }

  const std::size_t p = next_col;
  if (n < p + 2)
    throw InsufficientData("design has " + std::to_string(n) + " complete rows for " + std::to_string(p) +
                           " columns; need at least " + std::to_string(p + 2));

  design.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    auto row = design.X.row(static_cast<Eigen::Index>(i));
    row.setZero();
    row(0) = 1.0;
    for (const auto& e : design.encodings) encode_into(e, design.raw.at(e.term.name)[i], row);
  }
  return design;
}

}  // namespace agendascope
