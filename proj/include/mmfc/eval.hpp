#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfc/dataset.hpp"
#include "mmfc/metrics.hpp"
#include "mmfc/model.hpp"

namespace mmfc::eval {

// ---------------------------------------------------------------------------
// Eval sets

/// "all" or a comma-separated list of eval-set keys, returned in reporting
/// order. Throws UnknownDataset for keys outside the 12 eval sets.
std::vector<std::string> parse_eval_sets(std::string_view spec);

/// F1 per eval set present in `store`'s test split. Sets missing from the
/// store are skipped; an empty result throws EmptyInput.
std::map<std::string, double> evaluate_sets(const verifier::Verifier& model, const DataStore& store,
                                            std::span<const std::string> keys, Averaging averaging);

// ---------------------------------------------------------------------------
// Temporal partitions

enum class TemporalKey { pre, pos, ukr };
inline constexpr std::array<TemporalKey, 3> kTemporalKeys{TemporalKey::pre, TemporalKey::pos,
                                                          TemporalKey::ukr};
std::string_view temporal_name(TemporalKey k);

inline const std::vector<std::string> kUkraineKeywords{"ukraine", "russia",   "kyiv",
                                                       "kremlin", "zelensky", "invasion"};

struct PartitionOptions {
  std::uint64_t seed = 0;
  std::size_t sample_size = 1000;
  std::vector<std::string> keywords = kUkraineKeywords;  // lower case
};

/// pre: before 2020-12-01; pos: during 2021; ukr: during 2022 and a keyword
/// in the claim or evidence text. Undated examples match nothing.
bool in_partition(const VerificationExample& ex, TemporalKey key, const PartitionOptions& opts);

/// Samples exactly `sample_size` candidates per partition. The results are
/// relabeled as test examples of dataset "pre" / "pos" / "ukr". Throws
/// InsufficientPool when a partition has too few candidates.
std::map<TemporalKey, std::vector<VerificationExample>> build_temporal_partitions(
    std::span<const VerificationExample> pool, const PartitionOptions& opts);

// ---------------------------------------------------------------------------
// Reports

struct RunMetrics {
  std::string run_id;
  std::map<std::string, double> f1;  // eval set -> percent
};

struct EvalReport {
  std::string run_id;
  Averaging averaging = Averaging::macro;
  std::map<std::string, double> per_set_f1;
  std::optional<std::string> baseline_run;
  std::optional<std::map<std::string, double>> delta_f1;  // present iff baseline_run

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);  // throws SchemaViolation
};

/// delta = run - baseline over the shared eval sets. Throws DisjointEvalSets
/// when there are none, SchemaViolation for F1 values outside [0, 100].
EvalReport report(const RunMetrics& run, const std::optional<RunMetrics>& baseline,
                  Averaging averaging = Averaging::macro);

/// Two decimals with an explicit sign; values that round to zero print "0.00".
std::string format_delta(double delta);
std::string format_f1(double f1);

/// Row-labelled table. TSV is the machine contract; text is for humans.
struct Table {
  std::string corner;
  std::vector<std::string> columns;
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;

  std::string to_tsv() const;
  std::string to_text() const;
};

/// Columns follow the eval-set reporting order, then any other keys sorted.
std::vector<std::string> ordered_columns(std::span<const EvalReport> reports, bool deltas);

/// One row per report; cells are F1 values, or deltas when `deltas` is set.
/// Missing cells render as "-".
Table report_table(std::span<const EvalReport> reports, bool deltas);

}  // namespace mmfc::eval
