#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "agendascope/covariates.hpp"

namespace agendascope {

enum class TermKind {
  kAuto,         // plain name, resolved against the covariate table by bind_formula
  kLinear,
  kSpline,
  kCategorical,
};

struct FormulaTerm {
  TermKind kind = TermKind::kAuto;
  std::string name;
  int df = 0;  // spline terms only
  std::size_t offset = 0;  // byte offset of the term in the source text

  friend bool operator==(const FormulaTerm& a, const FormulaTerm& b) {
    return a.kind == b.kind && a.name == b.name && a.df == b.df;
  }
};

struct Formula {
  std::vector<FormulaTerm> terms;
  std::string text;

  const FormulaTerm* find(std::string_view name) const;
};

inline constexpr int kDefaultSplineDf = 10;
inline constexpr int kMinSplineDf = 4;

// Grammar (whitespace insignificant):
//   expr := term ('+' term)*
//   term := name | 's(' name (',' 'df' '=' int)? ')'
// Throws FormulaSyntaxError carrying the byte offset of the problem, also for
// df < 4 and duplicate terms.
Formula parse_formula(std::string_view text);

// Resolves kAuto terms: categorical columns become kCategorical, numeric and
// boolean columns kLinear. Throws UnknownCovariate for a missing column and
// InvalidArgument for a spline over a categorical column.
Formula bind_formula(const Formula& formula, const CovariateTable& covs);

std::string to_string(const Formula& formula);

}  // namespace agendascope
