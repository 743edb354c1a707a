#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agendascope {

// Base of every error raised by the library. `kind()` is a stable identifier
// that the CLI writes into its structured error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define AGENDASCOPE_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(#Name, what) {}       \
  }

// corpus
AGENDASCOPE_DEFINE_ERROR(AllDocumentsEmpty);
AGENDASCOPE_DEFINE_ERROR(DuplicateDocId);
AGENDASCOPE_DEFINE_ERROR(EmptyDirectory);
AGENDASCOPE_DEFINE_ERROR(InvalidArgument);

// stm_core
AGENDASCOPE_DEFINE_ERROR(DimensionMismatch);
AGENDASCOPE_DEFINE_ERROR(KExceedsVocabulary);
AGENDASCOPE_DEFINE_ERROR(SingularDesign);

// metrics / model_search
AGENDASCOPE_DEFINE_ERROR(TermAbsentFromCorpus);
AGENDASCOPE_DEFINE_ERROR(DegenerateX);

// effects
AGENDASCOPE_DEFINE_ERROR(UnknownCovariate);
AGENDASCOPE_DEFINE_ERROR(InsufficientData);

// serialization
AGENDASCOPE_DEFINE_ERROR(FormatError);

#undef AGENDASCOPE_DEFINE_ERROR

class MetadataParseError : public Error {
 public:
  MetadataParseError(std::size_t row, const std::string& what)
      : Error("MetadataParseError",
              "metadata row " + std::to_string(row) + ": " + what),
        row_(row) {}
  // 1-based line number in the metadata file (the header is line 1).
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class NonFiniteObjective : public Error {
 public:
  explicit NonFiniteObjective(int iteration)
      : Error("NonFiniteObjective",
              "approximate objective became non-finite at EM iteration " +
                  std::to_string(iteration)),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

class FormulaSyntaxError : public Error {
 public:
  FormulaSyntaxError(std::size_t offset, const std::string& what)
      : Error("SyntaxError",
              "formula syntax error at byte " + std::to_string(offset) + ": " +
                  what),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace agendascope
