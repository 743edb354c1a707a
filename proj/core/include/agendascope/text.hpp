#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace agendascope {

struct PreprocessConfig {
  std::size_t min_doc_freq = 10;
  std::size_t min_term_len = 3;
  // Stopwords are matched against lowercased tokens before stemming.
  std::set<std::string, std::less<>> stopwords;

  // Config populated with the built-in English stopword list.
  static PreprocessConfig defaults();
};

const std::set<std::string, std::less<>>& default_stopwords();

// One word per line; blank lines and lines starting with '#' are ignored.
std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path);

// Lowercase, split on anything that is not a letter, drop stopwords, stem,
// and drop stems shorter than min_term_len. Apostrophes inside a word are
// removed rather than treated as separators ("nation's" -> "nations").
// Bytes >= 0x80 are kept as word characters so UTF-8 letters survive.
std::vector<std::string> tokenize(std::string_view text, const PreprocessConfig& config);

}  // namespace agendascope
