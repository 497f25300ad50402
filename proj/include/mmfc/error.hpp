#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmfc {

// Coarse failure class. The CLI maps these onto process exit codes.
enum class ErrorCategory { usage, data, backend };

inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::backend: return 4;
  }
  return 1;
}

inline std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return "UsageError";
    case ErrorCategory::data: return "DataError";
    case ErrorCategory::backend: return "BackendError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorCategory category, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)), category_(category) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_; }

 private:
  std::string kind_;
  ErrorCategory category_;
};

#define MMFC_DEFINE_ERROR(Name, Category)                                  \
  class Name : public ::mmfc::Error {                                      \
   public:                                                                 \
    explicit Name(const std::string& message)                              \
        : ::mmfc::Error(#Name, ::mmfc::ErrorCategory::Category, message) {} \
  }

// schema
MMFC_DEFINE_ERROR(UnknownLabel, data);
MMFC_DEFINE_ERROR(MissingField, data);
MMFC_DEFINE_ERROR(BadImageRef, data);
MMFC_DEFINE_ERROR(SchemaViolation, data);
MMFC_DEFINE_ERROR(DuplicateId, data);
MMFC_DEFINE_ERROR(UnknownDataset, usage);

// mixture
MMFC_DEFINE_ERROR(MissingDataset, data);
MMFC_DEFINE_ERROR(EmptySplit, data);

// verifier
MMFC_DEFINE_ERROR(UnsupportedModality, backend);
MMFC_DEFINE_ERROR(BackendUnavailable, backend);
MMFC_DEFINE_ERROR(ShapeMismatch, backend);
MMFC_DEFINE_ERROR(DivergedLoss, backend);
MMFC_DEFINE_ERROR(InvalidConfig, usage);

// explain
MMFC_DEFINE_ERROR(MissingGold, data);
MMFC_DEFINE_ERROR(MissingZeroShot, data);
MMFC_DEFINE_ERROR(ClientError, backend);
MMFC_DEFINE_ERROR(BudgetExceeded, backend);
MMFC_DEFINE_ERROR(MissingExplanation, data);

// eval
MMFC_DEFINE_ERROR(MissingProbs, data);
MMFC_DEFINE_ERROR(LengthMismatch, data);
MMFC_DEFINE_ERROR(EmptyInput, data);
MMFC_DEFINE_ERROR(InsufficientPool, data);
MMFC_DEFINE_ERROR(DisjointEvalSets, data);

// anno
MMFC_DEFINE_ERROR(RaggedMatrix, data);
MMFC_DEFINE_ERROR(DegenerateAgreement, data);

}  // namespace mmfc
