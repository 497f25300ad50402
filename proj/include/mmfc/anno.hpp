#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfc/error.hpp"
#include "mmfc/schema.hpp"

namespace mmfc::anno {

enum class Question { q1, q2, q3, q4, q5, q6 };
inline constexpr std::array<Question, 6> kAllQuestions{Question::q1, Question::q2, Question::q3,
                                                       Question::q4, Question::q5, Question::q6};

std::string_view question_name(Question q);  // "Q1".."Q6"
Question parse_question(std::string_view s);  // throws SchemaViolation

/// Response categories of a question in tie-break preference order:
///   Q1-Q4  no, yes
///   Q5     true, false, unprovable, no
///   Q6     1, 2, 3, 4, 5
std::span<const std::string_view> categories(Question q);

/// Canonical category for a raw response ("Yes", "the label is true", " 4 ").
/// Throws SchemaViolation for anything outside the question's domain.
std::string normalize_response(Question q, std::string_view raw);

/// One row of the export: a participant's answer to one question on one item.
struct Annotation {
  std::string item_id;
  std::string generator;
  std::string annotator_id;
  Question question = Question::q1;
  std::string response;                 // canonical
  std::optional<VeracityLabel> label;  // conditioning label of the explanation
};

/// Reads the TSV export. Required columns: item_id, generator, annotator_id,
/// question, response. Optional: label (word form or code).
std::vector<Annotation> read_annotations(const std::filesystem::path& path);

struct Response {
  std::string annotator_id;
  std::string value;
};

/// All answers for one (item, generator) explanation.
struct AnnotationSet {
  std::string item_id;
  std::string generator;
  std::optional<VeracityLabel> label;
  std::map<Question, std::vector<Response>> answers;
};

/// Groups rows by (item_id, generator), in first-seen order.
std::vector<AnnotationSet> group(std::span<const Annotation> rows);

/// Throws SchemaViolation unless every set has exactly `n` answers per question.
void check_complete(std::span<const AnnotationSet> sets, std::size_t n = 5);

/// Modal canonical response, ties broken by the category preference order.
/// Throws EmptyInput on an empty list.
std::string majority(Question q, std::span<const std::string> responses);

/// Q5 category naming each gold label: true / false / unprovable.
std::string_view q5_category(VeracityLabel gold);

/// True when at least one Q5 answer names the gold label's category.
bool predictability(std::span<const std::string> q5, VeracityLabel gold);

// ---------------------------------------------------------------------------
// Agreement

using CountMatrix = std::vector<std::vector<int>>;  // items x categories

/// Fleiss' kappa. Every row must sum to the same n >= 2 (RaggedMatrix), and
/// chance agreement must be below 1 (DegenerateAgreement).
double fleiss_kappa(const CountMatrix& counts);

/// Fleiss' kappa allowing a different rater count per item. Items with fewer
/// than two ratings are skipped. Equals fleiss_kappa on rectangular input.
double fleiss_kappa_general(const CountMatrix& counts);

/// Category counts for question `q`, one row per set, restricted to the
/// annotators in `keep` when given.
CountMatrix count_matrix(std::span<const AnnotationSet> sets, Question q,
                         const std::vector<std::string>* keep = nullptr);

struct FilterReport {
  Question question = Question::q6;
  double threshold = 0.0;
  double initial_kappa = 0.0;
  double final_kappa = 0.0;
  std::vector<std::string> removed;     // in removal order
  std::vector<double> kappa_after;      // kappa after each removal
  std::vector<std::string> kept;        // sorted
};

/// Greedy leave-one-out: while kappa on `q` is below `threshold`, drops the
/// annotator whose removal raises kappa the most (ties: smallest id). Stops
/// when no removal helps or two annotators remain. threshold <= 0 disables.
FilterReport filter_annotators(std::span<const AnnotationSet> sets, double threshold,
                               Question q = Question::q6);

/// Drops answers from annotators outside `keep`.
std::vector<AnnotationSet> restrict_to(std::span<const AnnotationSet> sets,
                                       const std::vector<std::string>& keep);

// ---------------------------------------------------------------------------
// Report

struct GeneratorSummary {
  std::string generator;
  std::size_t items = 0;
  std::map<Question, std::map<std::string, std::size_t>> majority_counts;
  std::map<Question, double> yes_rate;   // Q1-Q4, share of items with majority "yes"
  double q5_majority_correct = 0.0;      // share of items whose Q5 majority names the gold label
  double predictability = 0.0;           // share of items predictable by >= 1 participant
  double quality_mean = 0.0;             // mean Q6 response
};

struct AnnoReport {
  std::optional<FilterReport> filter;
  std::map<Question, std::optional<double>> kappa;  // nullopt when degenerate
  std::vector<GeneratorSummary> generators;         // sorted by name

  nlohmann::ordered_json to_json() const;
};

AnnoReport summarize(std::span<const AnnotationSet> sets, std::optional<FilterReport> filter = {});

}  // namespace mmfc::anno
