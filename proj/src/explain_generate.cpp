#include <algorithm>
#include <cctype>
#include <exception>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mmfc/explain.hpp"
#include "mmfc/jsonl.hpp"

namespace mmfc::explain {

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Cache

std::optional<std::string> ExplanationCache::find(const Key& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ExplanationCache::insert(const Key& key, std::string text) {
  std::lock_guard lock(mu_);
  entries_[key] = std::move(text);
}

std::size_t ExplanationCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void ExplanationCache::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return;
  for (auto& r : read_explanations(path))
    insert({r.claim_id, code(r.conditioning_label), r.generator, r.prompt_hash}, std::move(r.text));
}

std::vector<ExplanationRecord> read_explanations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingDataset("cannot open explanations file " + path.string());
  std::vector<ExplanationRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ExplanationRecord r;
      r.claim_id = j.at("claim_id").get<std::string>();
      r.conditioning_label = label_from_code(j.at("label").get<int>());
      r.scenario = parse_scenario(j.at("scenario").get<std::string>());
      r.generator = j.at("generator").get<std::string>();
      r.text = j.at("text").get<std::string>();
      r.prompt_hash = j.at("prompt_hash").get<std::string>();
      r.over_word_limit = word_count(r.text) > kWordLimit;
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaViolation(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_explanations(const std::filesystem::path& path, std::span<const ExplanationRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j = {
        {"claim_id", r.claim_id},
        {"label", code(r.conditioning_label)},
        {"scenario", scenario_name(r.scenario)},
        {"generator", r.generator},
        {"text", r.text},
        {"prompt_hash", r.prompt_hash},
    };
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct Job {
  ExplanationCache::Key key;
  CompletionRequest request;
  std::string claim_id;
  std::string text;
};

}  // namespace

std::vector<ExplanationRecord> generate(std::span<const ExplanationRequest> requests, LlmClient& client,
                                        ExplanationCache& cache, const GenerateOptions& opts,
                                        GenerateStats* stats) {
  std::vector<ExplanationRecord> records(requests.size());
  std::vector<ExplanationCache::Key> keys(requests.size());
  std::vector<Job> jobs;
  std::map<ExplanationCache::Key, std::size_t> job_of;
  std::vector<std::optional<std::size_t>> pending(requests.size());
  std::size_t hits = 0;

  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    auto prompt = build_prompt(req.claim, req.evidence, req.label);
    auto& rec = records[i];
    rec.claim_id = req.claim_id;
    rec.conditioning_label = req.label;
    rec.scenario = req.scenario;
    rec.generator = opts.generator;
    rec.prompt_hash = prompt_hash(prompt);
    keys[i] = {req.claim_id, code(req.label), opts.generator, rec.prompt_hash};

    if (auto hit = cache.find(keys[i])) {
      rec.text = std::move(*hit);
      rec.cached = true;
      ++hits;
      continue;
    }
    auto [it, fresh] = job_of.try_emplace(keys[i], jobs.size());
    if (fresh) {
      jobs.push_back({keys[i],
                      {RequestKind::explanation, opts.generator, std::move(prompt), req.claim, req.label},
                      req.claim_id,
                      {}});
    } else {
      rec.cached = true;
      ++hits;
    }
    pending[i] = it->second;
  }

  auto sleep = opts.sleep ? opts.sleep
                          : std::function<void(std::chrono::milliseconds)>(
                                [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); });

  std::atomic<std::size_t> next_job{0};
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> retries{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::exception_ptr first_error;
  std::vector<std::string> retry_log;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t j = next_job.fetch_add(1);
      if (j >= jobs.size()) return;
      auto& job = jobs[j];
      try {
        for (int attempt = 0;; ++attempt) {
          const std::size_t n = calls.fetch_add(1) + 1;
          if (opts.budget && n > *opts.budget) {
            calls.fetch_sub(1);
            throw BudgetExceeded("request budget of " + std::to_string(*opts.budget) + " exhausted");
          }
          try {
            job.text = client.complete(job.request);
            break;
          } catch (const TransientClientError& e) {
            if (attempt >= opts.max_retries)
              throw ClientError("giving up on " + job.claim_id + " after " + std::to_string(attempt + 1) +
                                " attempts: " + e.what());
            retries.fetch_add(1);
            {
              std::lock_guard lock(mu);
              retry_log.push_back(job.claim_id + " label=" + std::to_string(std::get<1>(job.key)) +
                                  " attempt=" + std::to_string(attempt + 1) + " " + e.what());
            }
            auto delay = opts.base_backoff * (std::int64_t{1} << std::min(attempt, 30));
            sleep(std::min(delay, opts.max_backoff));
          }
        }
        if (job.text.empty()) throw ClientError("empty completion for " + job.claim_id);
        cache.insert(job.key, job.text);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(opts.concurrency, 1, std::max<std::size_t>(jobs.size(), 1));
  if (!jobs.empty()) {
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
  }

  if (stats) {
    stats->client_calls += calls.load();
    stats->cache_hits += hits;
    stats->retries += retries.load();
    stats->retry_log.insert(stats->retry_log.end(), retry_log.begin(), retry_log.end());
    std::sort(stats->retry_log.begin(), stats->retry_log.end());
  }
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (pending[i]) records[i].text = jobs[*pending[i]].text;
    records[i].over_word_limit = word_count(records[i].text) > kWordLimit;
  }
  return records;
}

VeracityLabel zero_shot_predict(std::string_view claim, std::string_view evidence, LlmClient& client,
                                const std::string& generator, ZeroShotStats& stats) {
  CompletionRequest req{RequestKind::zero_shot, generator, zero_shot_prompt(claim, evidence),
                        std::string(claim), std::nullopt};
  if (auto label = parse_label_reply(client.complete(req))) return *label;
  ++stats.unparseable;
  return VeracityLabel::nei;
}

// ---------------------------------------------------------------------------
// Augmentation

std::vector<VerificationExample> augment(std::span<const VerificationExample> examples,
                                         std::span<const ExplanationRecord> explanations,
                                         Scenario scenario, bool strict) {
  std::unordered_map<std::string, std::vector<const ExplanationRecord*>> by_claim;
  for (const auto& r : explanations)
    if (r.scenario == scenario) by_claim[r.claim_id].push_back(&r);
  for (auto& [id, recs] : by_claim)
    std::stable_sort(recs.begin(), recs.end(), [](auto* a, auto* b) {
      return code(a->conditioning_label) < code(b->conditioning_label);
    });

  std::vector<VerificationExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    auto& aug = out.emplace_back(ex);
    auto it = by_claim.find(ex.id);
    if (it == by_claim.end()) {
      if (strict)
        throw MissingExplanation("no " + std::string(scenario_name(scenario)) + " explanation for " + ex.id);
      continue;
    }
    for (const auto* r : it->second) {
      aug.evidence.push_back(EvidenceItem::text(r->text, true));
    }
  }
  return out;
}

VerificationExample strip_silver(VerificationExample ex) {
  std::erase_if(ex.evidence, [](const EvidenceItem& e) { return e.silver; });
  return ex;
}

}  // namespace mmfc::explain
