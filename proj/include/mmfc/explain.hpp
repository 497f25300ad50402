#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mmfc/error.hpp"
#include "mmfc/schema.hpp"

namespace mmfc::explain {

// ---------------------------------------------------------------------------
// Scenarios

enum class Scenario {
  oracle,
  opposite,
  random,
  all,
  always_supports,
  always_refutes,
  always_nei,
  guided,
};

inline constexpr std::array<Scenario, 8> kAllScenarios{
    Scenario::oracle,          Scenario::opposite,       Scenario::random,
    Scenario::all,             Scenario::always_supports, Scenario::always_refutes,
    Scenario::always_nei,      Scenario::guided};

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view s);

/// oracle and opposite condition on the gold label; the other six must not.
constexpr bool needs_gold(Scenario s) { return s == Scenario::oracle || s == Scenario::opposite; }

/// What a no-gold scenario is allowed to see of a claim. There is deliberately
/// no label here.
struct ClaimView {
  std::string_view claim_id;
  std::string_view claim;
};

ClaimView view_of(const VerificationExample& ex);

struct ScenarioOptions {
  std::uint64_t seed = 0;
  VeracityLabel opposite_of_nei = VeracityLabel::nei;  // nei has no opposite
};

/// Label selection for the six scenarios that never read gold labels. A pure
/// function of (claim_id, scenario, seed, zero_shot). Throws MissingZeroShot
/// for guided without a prediction, InvalidConfig for oracle / opposite.
std::vector<VeracityLabel> choose_label_blind(const ClaimView& claim, Scenario scenario,
                                              const ScenarioOptions& opts,
                                              std::optional<VeracityLabel> zero_shot = {});

/// Full dispatch. Gold is forwarded only to oracle / opposite; the others go
/// through choose_label_blind. Throws MissingGold when a gold scenario has none.
std::vector<VeracityLabel> choose_label(const ClaimView& claim, std::optional<VeracityLabel> gold,
                                        Scenario scenario, const ScenarioOptions& opts,
                                        std::optional<VeracityLabel> zero_shot = {});

// ---------------------------------------------------------------------------
// Prompts

extern const std::string_view kSystemPrompt;

struct Prompt {
  std::string system;
  std::string user;
};

/// Explanation prompt for `label`, rendered with its word form.
Prompt build_prompt(std::string_view claim, std::string_view evidence, VeracityLabel label);

/// Zero-shot veracity prompt used by the guided scenario.
Prompt zero_shot_prompt(std::string_view claim, std::string_view evidence);

/// Hash of the exact bytes sent to the generator (system, NUL, user).
std::string prompt_hash(const Prompt& p);

/// Keyword parse of a zero-shot reply; the earliest label keyword wins.
/// Returns nullopt when nothing matches.
std::optional<VeracityLabel> parse_label_reply(std::string_view reply);

// ---------------------------------------------------------------------------
// Client contract

/// Retryable failure (rate limit, timeout, 5xx).
class TransientClientError : public ClientError {
 public:
  using ClientError::ClientError;
};

enum class RequestKind { explanation, zero_shot };

struct CompletionRequest {
  RequestKind kind = RequestKind::explanation;
  std::string model;
  Prompt prompt;
  // Structured copies of the substituted fields, for offline clients.
  std::string claim;
  std::optional<VeracityLabel> label;
};

/// Must be safe to call from several threads at once.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const CompletionRequest& req) = 0;
};

/// Offline client. Explanations are "STUB[<label>]: <claim>"; zero-shot
/// replies are a fixed string when configured, otherwise a label word chosen
/// by hashing the claim.
class StubClient final : public LlmClient {
 public:
  explicit StubClient(std::optional<std::string> zero_shot_reply = {});
  std::string complete(const CompletionRequest& req) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::optional<std::string> zero_shot_reply_;
  std::atomic<std::size_t> calls_{0};
};

struct OpenAiOptions {
  std::string api_key_env = "OPENAI_API_KEY";
  std::string base_url = "https://api.openai.com";  // overridden by OPENAI_BASE_URL
  double temperature = 0.0;
  std::chrono::seconds timeout{60};
};

/// Chat-completions client. Reads the API key from the environment at
/// construction; throws ClientError when it is absent.
class OpenAiClient final : public LlmClient {
 public:
  explicit OpenAiClient(OpenAiOptions opts = {});
  std::string complete(const CompletionRequest& req) override;

 private:
  OpenAiOptions opts_;
  std::string api_key_;
};

// ---------------------------------------------------------------------------
// Generation

struct ExplanationRequest {
  std::string claim_id;
  std::string claim;
  std::string evidence;
  VeracityLabel label = VeracityLabel::nei;
  Scenario scenario = Scenario::oracle;
};

inline constexpr std::size_t kWordLimit = 100;

struct ExplanationRecord {
  std::string claim_id;
  VeracityLabel conditioning_label = VeracityLabel::nei;
  Scenario scenario = Scenario::oracle;
  std::string generator;
  std::string text;
  std::string prompt_hash;
  bool cached = false;
  bool over_word_limit = false;  // soft flag, never an error
};

std::size_t word_count(std::string_view text);

/// JSONL lines {claim_id, label, scenario, generator, text, prompt_hash}.
std::vector<ExplanationRecord> read_explanations(const std::filesystem::path& path);
void write_explanations(const std::filesystem::path& path, std::span<const ExplanationRecord> records);

/// Thread-safe explanation cache keyed by (claim_id, label, generator,
/// prompt hash). Concurrent inserts of one key keep the last write.
class ExplanationCache {
 public:
  using Key = std::tuple<std::string, int, std::string, std::string>;

  std::optional<std::string> find(const Key& key) const;
  void insert(const Key& key, std::string text);
  std::size_t size() const;

  /// Loads an explanations file if it exists.
  void load(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::map<Key, std::string> entries_;
};

struct GenerateOptions {
  std::string generator = "gpt-4o";
  int max_retries = 5;
  std::chrono::milliseconds base_backoff{250};
  std::chrono::milliseconds max_backoff{8000};
  std::size_t concurrency = 4;
  std::optional<std::size_t> budget;  // cap on client calls, retries included
  std::function<void(std::chrono::milliseconds)> sleep;  // default: this_thread::sleep_for
};

struct GenerateStats {
  std::size_t client_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t retries = 0;
  std::vector<std::string> retry_log;  // sorted
};

/// Resolves every request through the cache or the client. Output order
/// follows input order. Throws ClientError once retries are exhausted and
/// BudgetExceeded when the call budget runs out.
std::vector<ExplanationRecord> generate(std::span<const ExplanationRequest> requests, LlmClient& client,
                                        ExplanationCache& cache, const GenerateOptions& opts,
                                        GenerateStats* stats = nullptr);

struct ZeroShotStats {
  std::size_t unparseable = 0;
};

/// Asks the client for a veracity label. Unparseable replies count as nei and
/// bump `stats.unparseable`.
VeracityLabel zero_shot_predict(std::string_view claim, std::string_view evidence, LlmClient& client,
                                const std::string& generator, ZeroShotStats& stats);

// ---------------------------------------------------------------------------
// Augmentation

/// Appends each example's explanations for `scenario` as silver text evidence
/// after the existing evidence, in label order. Examples without one are left
/// unchanged, or rejected with MissingExplanation when `strict`.
std::vector<VerificationExample> augment(std::span<const VerificationExample> examples,
                                         std::span<const ExplanationRecord> explanations,
                                         Scenario scenario, bool strict = false);

/// Removes every silver evidence item.
VerificationExample strip_silver(VerificationExample ex);

}  // namespace mmfc::explain
