#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agendascope/covariates.hpp"
#include "agendascope/text.hpp"

namespace agendascope {

struct RawDocument {
  std::string doc_id;
  std::string country;  // ISO-3166 alpha-3
  int year = 0;
  std::string text;
};

// Sparse bag of words for one document, terms strictly increasing.
struct DocTerms {
  std::vector<std::int32_t> terms;
  std::vector<std::int32_t> counts;

  std::size_t unique() const { return terms.size(); }
  std::int64_t total() const {
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
};

struct Corpus {
  std::vector<std::string> vocabulary;  // sorted, duplicate-free
  std::vector<DocTerms> docs;
  std::vector<std::string> doc_ids;
  CovariateTable covariates;  // rows aligned with doc_ids

  std::size_t num_docs() const { return docs.size(); }
  std::size_t vocab_size() const { return vocabulary.size(); }

  // Throws InvalidArgument describing the first violated structural invariant
  // (empty row, unsorted vocabulary, out-of-range term, misaligned covariates).
  void validate() const;

  // Documents containing each term.
  std::vector<std::int64_t> document_frequency() const;
  // Total count of each term across the corpus.
  std::vector<std::int64_t> term_totals() const;

  // Keeps the given documents in the given order and drops terms that no
  // longer occur, re-indexing the survivors.
  Corpus select_documents(const std::vector<std::size_t>& rows) const;
};

struct BuildReport {
  std::vector<std::string> dropped_empty;            // emptied by preprocessing or thresholding
  std::vector<std::string> docs_without_covariates;  // dropped by the inner join
  std::vector<std::string> covariates_without_docs;  // unmatched covariate rows
};

// Tokenizes every document (in parallel when threads > 1), inner-joins the
// covariates on doc_id, keeps terms whose document frequency reaches
// config.min_doc_freq, and drops documents left empty.
// Throws DuplicateDocId, AllDocumentsEmpty, InvalidArgument (min_doc_freq == 0).
Corpus build_corpus(const std::vector<RawDocument>& docs, const CovariateTable& covs,
                    const PreprocessConfig& config, BuildReport* report = nullptr,
                    unsigned threads = 1);

struct UngdcLoad {
  std::vector<RawDocument> docs;
  CovariateTable covariates;
  std::vector<std::string> warnings;  // skipped files and other non-fatal issues
};

// Parses "{ISO3}_{session}_{year}.txt". Returns false for non-conforming names.
bool parse_statement_filename(const std::string& filename, std::string& country, int& session,
                              int& year);

// Reads every conforming .txt file in `dir` (sorted by file name) and the
// covariate table at `meta`, adding numeric `year` and categorical `country`
// columns parsed from each doc_id when the table lacks them.
// Throws EmptyDirectory when no file conforms and MetadataParseError for a
// bad metadata row.
UngdcLoad load_ungdc_layout(const std::filesystem::path& dir, const std::filesystem::path& meta);

}  // namespace agendascope
