#include "agendascope/text.hpp"

#include <fstream>

#include "agendascope/error.hpp"
#include "agendascope/porter_stemmer.hpp"

namespace agendascope {

const std::set<std::string, std::less<>>& default_stopwords() {
  // Snowball English list plus a few modal/auxiliary forms.
  static const std::set<std::string, std::less<>> words = {
      "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and",
      "any", "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below",
      "between", "both", "but", "by", "can", "cannot", "could", "couldn", "did", "didn",
      "do", "does", "doesn", "doing", "don", "down", "during", "each", "few", "for", "from",
      "further", "had", "hadn", "has", "hasn", "have", "haven", "having", "he", "her", "here",
      "hers", "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "isn",
      "it", "its", "itself", "just", "may", "me", "might", "more", "most", "must", "mustn",
      "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or",
      "other", "ought", "our", "ours", "ourselves", "out", "over", "own", "same", "shall",
      "shan", "she", "should", "shouldn", "so", "some", "such", "than", "that", "the",
      "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
      "those", "through", "to", "too", "under", "until", "up", "upon", "very", "was",
      "wasn", "we", "were", "weren", "what", "when", "where", "which", "while", "who",
      "whom", "why", "will", "with", "won", "would", "wouldn", "you", "your", "yours",
      "yourself", "yourselves"};
  return words;
}

PreprocessConfig PreprocessConfig::defaults() {
  PreprocessConfig c;
  c.stopwords = default_stopwords();
  return c;
}

std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open stopword file " + path.string());
  std::set<std::string, std::less<>> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::string w = line.substr(start);
    for (char& c : w)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.insert(std::move(w));
  }
  return out;
}

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const PreprocessConfig& config) {
  std::vector<std::string> out;
  std::string word;

  auto flush = [&] {
    if (word.empty()) return;
    if (!config.stopwords.contains(word)) {
      std::string stem = porter_stem(word);
      if (stem.size() >= config.min_term_len) out.push_back(std::move(stem));
    }
    word.clear();
  };

  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    // U+2019 RIGHT SINGLE QUOTATION MARK is E2 80 99
    bool curly = c == 0xE2 && i + 2 < n && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
                 static_cast<unsigned char>(text[i + 2]) == 0x99;
    if (c == '\'' || curly) {
      if (curly) i += 2;
      std::size_t next = i + 1;
      if (!word.empty() && next < n && is_word_byte(static_cast<unsigned char>(text[next])) &&
          static_cast<unsigned char>(text[next]) < 0x80)
        continue;  // apostrophe inside a word
      flush();
      continue;
    }
    if (is_word_byte(c)) {
      word.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace agendascope
