#include "agendascope/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "agendascope/error.hpp"
#include "agendascope/parallel.hpp"

namespace agendascope {

void Corpus::validate() const {
  const auto V = static_cast<std::int32_t>(vocabulary.size());
  for (std::size_t i = 1; i < vocabulary.size(); ++i)
    if (!(vocabulary[i - 1] < vocabulary[i]))
      throw InvalidArgument("vocabulary not sorted/unique at index " + std::to_string(i));
  if (doc_ids.size() != docs.size())
    throw InvalidArgument("doc_ids and docs differ in length");
  if (covariates.rows() != docs.size() || covariates.doc_ids() != doc_ids)
    throw InvalidArgument("covariate rows are not aligned with doc_ids");
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    if (doc.terms.empty() || doc.terms.size() != doc.counts.size())
      throw InvalidArgument("document '" + doc_ids[d] + "' is empty or malformed");
    for (std::size_t i = 0; i < doc.terms.size(); ++i) {
      if (doc.terms[i] < 0 || doc.terms[i] >= V || doc.counts[i] <= 0 ||
          (i > 0 && doc.terms[i] <= doc.terms[i - 1]))
        throw InvalidArgument("document '" + doc_ids[d] + "' has an invalid term entry");
    }
  }
}

std::vector<std::int64_t> Corpus::document_frequency() const {
  std::vector<std::int64_t> df(vocabulary.size(), 0);
  for (const auto& doc : docs)
    for (auto t : doc.terms) ++df[static_cast<std::size_t>(t)];
  return df;
}

std::vector<std::int64_t> Corpus::term_totals() const {
  std::vector<std::int64_t> tot(vocabulary.size(), 0);
  for (const auto& doc : docs)
    for (std::size_t i = 0; i < doc.terms.size(); ++i)
      tot[static_cast<std::size_t>(doc.terms[i])] += doc.counts[i];
  return tot;
}

Corpus Corpus::select_documents(const std::vector<std::size_t>& rows) const {
  std::vector<char> used(vocabulary.size(), 0);
  for (auto r : rows)
    for (auto t : docs.at(r).terms) used[static_cast<std::size_t>(t)] = 1;
  std::vector<std::int32_t> remap(vocabulary.size(), -1);
  Corpus out;
  for (std::size_t v = 0; v < vocabulary.size(); ++v) {
    if (!used[v]) continue;
    remap[v] = static_cast<std::int32_t>(out.vocabulary.size());
    out.vocabulary.push_back(vocabulary[v]);
  }
  for (auto r : rows) {
    DocTerms d = docs[r];
    for (auto& t : d.terms) t = remap[static_cast<std::size_t>(t)];
    out.docs.push_back(std::move(d));
    out.doc_ids.push_back(doc_ids[r]);
  }
  out.covariates = covariates.select_rows(rows);
  return out;
}

Corpus build_corpus(const std::vector<RawDocument>& docs, const CovariateTable& covs,
                    const PreprocessConfig& config, BuildReport* report, unsigned threads) {
  if (config.min_doc_freq < 1) throw InvalidArgument("min_doc_freq must be >= 1");
  {
    std::unordered_set<std::string> ids;
    for (const auto& d : docs)
      if (!ids.insert(d.doc_id).second) throw DuplicateDocId("duplicate doc_id '" + d.doc_id + "'");
  }
  BuildReport local;
  BuildReport& rep = report ? *report : local;
  rep = BuildReport{};

  std::unordered_map<std::string, std::size_t> cov_row;
  for (std::size_t r = 0; r < covs.rows(); ++r) cov_row.emplace(covs.doc_ids()[r], r);

  // Inner join first so the frequency threshold sees only surviving documents.
  std::vector<std::size_t> joined;
  std::unordered_set<std::string> matched;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (cov_row.contains(docs[i].doc_id)) {
      joined.push_back(i);
      matched.insert(docs[i].doc_id);
    } else {
      rep.docs_without_covariates.push_back(docs[i].doc_id);
    }
  }
  for (const auto& id : covs.doc_ids())
    if (!matched.contains(id)) rep.covariates_without_docs.push_back(id);

  std::vector<std::vector<std::string>> tokens(joined.size());
  parallel_for(joined.size(), threads, [&](std::size_t i) {
    tokens[i] = tokenize(docs[joined[i]].text, config);
  });

  std::map<std::string, std::int64_t> df;
  for (const auto& toks : tokens) {
    std::vector<std::string> uniq = toks;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[t];
  }

  Corpus corpus;
  std::unordered_map<std::string, std::int32_t> index;
  for (const auto& [term, n] : df) {
    if (static_cast<std::size_t>(n) < config.min_doc_freq) continue;
    index.emplace(term, static_cast<std::int32_t>(corpus.vocabulary.size()));
    corpus.vocabulary.push_back(term);
  }

  std::vector<std::size_t> cov_rows;
  for (std::size_t i = 0; i < joined.size(); ++i) {
    std::map<std::int32_t, std::int32_t> counts;
    for (const auto& t : tokens[i]) {
      auto it = index.find(t);
      if (it != index.end()) ++counts[it->second];
    }
    const auto& id = docs[joined[i]].doc_id;
    if (counts.empty()) {
      rep.dropped_empty.push_back(id);
      continue;
    }
    DocTerms dt;
    for (auto [t, c] : counts) {
      dt.terms.push_back(t);
      dt.counts.push_back(c);
    }
    corpus.docs.push_back(std::move(dt));
    corpus.doc_ids.push_back(id);
    cov_rows.push_back(cov_row.at(id));
  }
  if (corpus.docs.empty()) throw AllDocumentsEmpty("no document survived preprocessing");
  corpus.covariates = covs.select_rows(cov_rows);
  return corpus;
}

bool parse_statement_filename(const std::string& filename, std::string& country, int& session,
                              int& year) {
  static constexpr std::string_view kExt = ".txt";
  if (filename.size() <= kExt.size() || !filename.ends_with(kExt)) return false;
  std::string stem = filename.substr(0, filename.size() - kExt.size());
  auto p1 = stem.find('_');
  if (p1 != 3) return false;
  auto p2 = stem.find('_', p1 + 1);
  if (p2 == std::string::npos || stem.find('_', p2 + 1) != std::string::npos) return false;
  std::string iso = stem.substr(0, 3);
  for (char c : iso)
    if (c < 'A' || c > 'Z') return false;
  auto digits = [](const std::string& s) {
    return !s.empty() && s.size() <= 9 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  std::string s_session = stem.substr(p1 + 1, p2 - p1 - 1);
  std::string s_year = stem.substr(p2 + 1);
  if (!digits(s_session) || !digits(s_year) || s_year.size() != 4) return false;
  int y = std::stoi(s_year);
  if (y < 1970 || y > 2016) return false;
  country = iso;
  session = std::stoi(s_session);
  year = y;
  return true;
}

UngdcLoad load_ungdc_layout(const std::filesystem::path& dir, const std::filesystem::path& meta) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw EmptyDirectory(dir.string() + " is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  UngdcLoad out;
  for (const auto& f : files) {
    std::string name = f.filename().string();
    RawDocument doc;
    int session = 0;
    if (!parse_statement_filename(name, doc.country, session, doc.year)) {
      out.warnings.push_back("skipped non-conforming file " + name);
      continue;
    }
    std::ifstream in(f, std::ios::binary);
    if (!in) {
      out.warnings.push_back("cannot read " + name);
      continue;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    doc.text = ss.str();
    if (doc.text.find_first_not_of(" \t\r\n") == std::string::npos) {
      out.warnings.push_back("skipped empty file " + name);
      continue;
    }
    doc.doc_id = f.stem().string();
    out.docs.push_back(std::move(doc));
  }
  if (out.docs.empty()) throw EmptyDirectory("no {ISO3}_{session}_{year}.txt files in " + dir.string());
  out.covariates = load_covariate_csv(meta);

  // Year and country come from the file naming scheme; exposed as covariates
  // unless the metadata already has such columns.
  const auto& ids = out.covariates.doc_ids();
  CovariateColumn year{"year", ColumnKind::kNumeric, std::vector<std::optional<double>>(ids.size()), {}};
  CovariateColumn country{"country", ColumnKind::kCategorical, {}, std::vector<std::optional<std::string>>(ids.size())};
  for (std::size_t r = 0; r < ids.size(); ++r) {
    std::string iso;
    int session = 0, y = 0;
    if (parse_statement_filename(ids[r] + ".txt", iso, session, y)) {
      year.numeric[r] = y;
      country.categorical[r] = iso;
    }
  }
  if (!out.covariates.find("year")) out.covariates.add_column(std::move(year));
  if (!out.covariates.find("country")) out.covariates.add_column(std::move(country));
  return out;
}

}  // namespace agendascope
