#include "agendascope/formula.hpp"

#include <cctype>
#include <charconv>

#include "agendascope/error.hpp"

namespace agendascope {

const FormulaTerm* Formula::find(std::string_view name) const {
  for (const auto& t : terms)
    if (t.name == name) return &t;
  return nullptr;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Formula parse() {
    Formula f;
    f.text = std::string(s_);
    skip_ws();
    if (pos_ == s_.size()) throw FormulaSyntaxError(pos_, "empty formula");
    while (true) {
      FormulaTerm t = term();
      for (const auto& prev : f.terms)
        if (prev.name == t.name) throw FormulaSyntaxError(t.offset, "duplicate term '" + t.name + "'");
      f.terms.push_back(std::move(t));
      skip_ws();
      if (pos_ == s_.size()) break;
      expect('+');
    }
    return f;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size()) throw FormulaSyntaxError(pos_, std::string("expected '") + c + "', found end of input");
    if (s_[pos_] != c)
      throw FormulaSyntaxError(pos_, std::string("expected '") + c + "', found '" + s_[pos_] + "'");
    ++pos_;
  }

  std::string name() {
    skip_ws();
    std::size_t start = pos_;
    auto is_head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto is_tail = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    };
    if (pos_ >= s_.size() || !is_head(s_[pos_])) throw FormulaSyntaxError(pos_, "expected a covariate name");
    while (pos_ < s_.size() && is_tail(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  FormulaTerm term() {
    skip_ws();
    FormulaTerm t;
    t.offset = pos_;
    std::string n = name();
    if (n == "s" && peek('(')) {
      expect('(');
      t.kind = TermKind::kSpline;
      t.name = name();
      t.df = kDefaultSplineDf;
      if (peek(',')) {
        expect(',');
        std::size_t at = (skip_ws(), pos_);
        if (name() != "df") throw FormulaSyntaxError(at, "expected 'df'");
        expect('=');
        skip_ws();
        std::size_t num_at = pos_;
        int df = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), df);
        if (ec != std::errc() || ptr == s_.data() + pos_)
          throw FormulaSyntaxError(num_at, "expected an integer df");
        pos_ = static_cast<std::size_t>(ptr - s_.data());
        if (df < kMinSplineDf)
          throw FormulaSyntaxError(num_at, "spline df must be >= " + std::to_string(kMinSplineDf));
        t.df = df;
      }
      expect(')');
    } else {
      t.kind = TermKind::kAuto;
      t.name = std::move(n);
    }
    return t;
  }
};

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).parse(); }

Formula bind_formula(const Formula& formula, const CovariateTable& covs) {
  Formula out = formula;
  for (auto& t : out.terms) {
    const auto& col = covs.column(t.name);
    if (t.kind == TermKind::kAuto) {
      t.kind = col.kind == ColumnKind::kCategorical ? TermKind::kCategorical : TermKind::kLinear;
    } else if (t.kind == TermKind::kSpline && col.kind == ColumnKind::kCategorical) {
      throw InvalidArgument("spline term over categorical covariate '" + t.name + "'");
    }
  }
  return out;
}

std::string to_string(const Formula& formula) {
  std::string out;
  for (const auto& t : formula.terms) {
    if (!out.empty()) out += " + ";
    if (t.kind == TermKind::kSpline)
      out += "s(" + t.name + ",df=" + std::to_string(t.df) + ")";
    else
      out += t.name;
  }
  return out;
}

}  // namespace agendascope
