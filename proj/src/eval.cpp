#include "mmfc/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "mmfc/error.hpp"
#include "mmfc/random.hpp"
#include "mmfc/registry.hpp"
#include "mmfc/train.hpp"

namespace mmfc::eval {

std::vector<std::string> parse_eval_sets(std::string_view spec) {
  const auto all = eval_set_keys();
  if (spec == "all") return {all.begin(), all.end()};

  std::set<std::string, std::less<>> wanted;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    auto item = spec.substr(start, end - start);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) {
      if (std::find(all.begin(), all.end(), item) == all.end())
        throw UnknownDataset("not an eval set: " + std::string(item));
      wanted.emplace(item);
    }
    start = end + 1;
  }
  if (wanted.empty()) throw InvalidConfig("no eval sets selected");

  std::vector<std::string> out;
  for (auto k : all)
    if (wanted.contains(k)) out.emplace_back(k);
  return out;
}

std::map<std::string, double> evaluate_sets(const verifier::Verifier& model, const DataStore& store,
                                            std::span<const std::string> keys, Averaging averaging) {
  std::map<std::string, double> out;
  for (const auto& key : keys) {
    if (!store.contains(key)) continue;
    auto test = store.at(key).split(Split::test);
    if (test.empty()) continue;
    out[key] = verifier::evaluate(model, test, descriptor(key).label_space, averaging);
  }
  if (out.empty()) throw EmptyInput("none of the requested eval sets have test examples");
  return out;
}

// ---------------------------------------------------------------------------
// Temporal partitions

std::string_view temporal_name(TemporalKey k) {
  switch (k) {
    case TemporalKey::pre: return "pre";
    case TemporalKey::pos: return "pos";
    case TemporalKey::ukr: return "ukr";
  }
  return "pre";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool mentions_topic(const VerificationExample& ex, const std::vector<std::string>& keywords) {
  const auto text = lower(ex.claim) + "\n" + lower(evidence_text(ex));
  return std::any_of(keywords.begin(), keywords.end(),
                     [&](const std::string& kw) { return text.find(kw) != std::string::npos; });
}

}  // namespace

bool in_partition(const VerificationExample& ex, TemporalKey key, const PartitionOptions& opts) {
  if (!ex.timestamp) return false;
  const Date& d = *ex.timestamp;
  switch (key) {
    case TemporalKey::pre: return d < Date{2020, 12, 1};
    case TemporalKey::pos: return d.year == 2021;
    case TemporalKey::ukr: return d.year == 2022 && mentions_topic(ex, opts.keywords);
  }
  return false;
}

std::map<TemporalKey, std::vector<VerificationExample>> build_temporal_partitions(
    std::span<const VerificationExample> pool, const PartitionOptions& opts) {
  std::map<TemporalKey, std::vector<VerificationExample>> out;
  for (auto key : kTemporalKeys) {
    std::vector<const VerificationExample*> candidates;
    for (const auto& ex : pool)
      if (in_partition(ex, key, opts)) candidates.push_back(&ex);
    if (candidates.size() < opts.sample_size)
      throw InsufficientPool(std::string(temporal_name(key)) + " has " + std::to_string(candidates.size()) +
                             " candidates, need " + std::to_string(opts.sample_size));

    std::sort(candidates.begin(), candidates.end(),
              [](auto* a, auto* b) { return a->id < b->id; });
    Rng rng(derive_seed(opts.seed, "temporal", temporal_name(key)));
    rng.shuffle(std::span(candidates));
    candidates.resize(opts.sample_size);

    auto& part = out[key];
    part.reserve(candidates.size());
    for (const auto* c : candidates) {
      auto ex = *c;
      ex.dataset = temporal_name(key);
      ex.split = Split::test;
      part.push_back(std::move(ex));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["run_id"] = run_id;
  j["averaging"] = averaging_name(averaging);
  nlohmann::ordered_json f = nlohmann::ordered_json::object();
  for (const auto& col : ordered_columns(std::span(this, 1), false)) f[col] = per_set_f1.at(col);
  j["per_set_f1"] = std::move(f);
  j["baseline_run"] = baseline_run ? nlohmann::ordered_json(*baseline_run) : nlohmann::ordered_json();
  if (delta_f1) {
    nlohmann::ordered_json d = nlohmann::ordered_json::object();
    for (const auto& col : ordered_columns(std::span(this, 1), true)) d[col] = delta_f1->at(col);
    j["delta_f1"] = std::move(d);
  } else {
    j["delta_f1"] = nullptr;
  }
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.averaging = parse_averaging(j.at("averaging").get<std::string>());
    r.per_set_f1 = j.at("per_set_f1").get<std::map<std::string, double>>();
    if (j.contains("baseline_run") && !j["baseline_run"].is_null())
      r.baseline_run = j["baseline_run"].get<std::string>();
    if (j.contains("delta_f1") && !j["delta_f1"].is_null())
      r.delta_f1 = j["delta_f1"].get<std::map<std::string, double>>();
    if (r.baseline_run.has_value() != r.delta_f1.has_value())
      throw SchemaViolation("delta_f1 must be present exactly when baseline_run is set");
    for (const auto& [k, v] : r.per_set_f1)
      if (!(v >= 0.0 && v <= 100.0)) throw SchemaViolation("F1 out of range for " + k);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(std::string("malformed eval report: ") + e.what());
  }
}

EvalReport report(const RunMetrics& run, const std::optional<RunMetrics>& baseline, Averaging averaging) {
  auto check = [](const RunMetrics& m) {
    for (const auto& [k, v] : m.f1)
      if (!(v >= 0.0 && v <= 100.0))
        throw SchemaViolation("F1 for " + k + " in run " + m.run_id + " is outside [0, 100]");
  };
  check(run);

  EvalReport r;
  r.run_id = run.run_id;
  r.averaging = averaging;
  r.per_set_f1 = run.f1;
  if (baseline) {
    check(*baseline);
    std::map<std::string, double> delta;
    for (const auto& [k, v] : run.f1)
      if (auto it = baseline->f1.find(k); it != baseline->f1.end()) delta[k] = v - it->second;
    if (delta.empty())
      throw DisjointEvalSets("runs " + run.run_id + " and " + baseline->run_id + " share no eval sets");
    r.baseline_run = baseline->run_id;
    r.delta_f1 = std::move(delta);
  }
  return r;
}

std::string format_delta(double delta) {
  const double rounded = std::round(delta * 100.0) / 100.0;
  if (rounded == 0.0) return "0.00";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f", rounded);
  return buf;
}

std::string format_f1(double f1) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", f1);
  return buf;
}

std::string Table::to_tsv() const {
  std::string out = corner;
  for (const auto& c : columns) out += "\t" + c;
  out += '\n';
  for (const auto& [label, cells] : rows) {
    out += label;
    for (const auto& c : cells) out += "\t" + c;
    out += '\n';
  }
  return out;
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(columns.size() + 1, 0);
  width[0] = corner.size();
  for (std::size_t i = 0; i < columns.size(); ++i) width[i + 1] = columns[i].size();
  for (const auto& [label, cells] : rows) {
    width[0] = std::max(width[0], label.size());
    for (std::size_t i = 0; i < cells.size() && i < columns.size(); ++i)
      width[i + 1] = std::max(width[i + 1], cells[i].size());
  }

  auto line = [&](const std::string& first, const std::vector<std::string>& cells) {
    std::string out = first + std::string(width[0] - first.size(), ' ');
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string& c = i < cells.size() ? cells[i] : std::string();
      out += "  " + std::string(width[i + 1] - c.size(), ' ') + c;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + '\n';
  };

  std::string out = line(corner, columns);
  std::size_t total = width[0];
  for (std::size_t i = 1; i < width.size(); ++i) total += 2 + width[i];
  out += std::string(total, '-') + '\n';
  for (const auto& [label, cells] : rows) out += line(label, cells);
  return out;
}

std::vector<std::string> ordered_columns(std::span<const EvalReport> reports, bool deltas) {
  std::set<std::string, std::less<>> keys;
  for (const auto& r : reports) {
    if (deltas) {
      if (r.delta_f1)
        for (const auto& [k, v] : *r.delta_f1) keys.insert(k);
    } else {
      for (const auto& [k, v] : r.per_set_f1) keys.insert(k);
    }
  }
  std::vector<std::string> out;
  for (auto k : eval_set_keys())
    if (auto it = keys.find(k); it != keys.end()) {
      out.emplace_back(k);
      keys.erase(it);
    }
  out.insert(out.end(), keys.begin(), keys.end());
  return out;
}

Table report_table(std::span<const EvalReport> reports, bool deltas) {
  Table t;
  t.corner = "run";
  t.columns = ordered_columns(reports, deltas);
  for (const auto& r : reports) {
    std::vector<std::string> cells;
    for (const auto& col : t.columns) {
      if (deltas) {
        if (r.delta_f1 && r.delta_f1->contains(col))
          cells.push_back(format_delta(r.delta_f1->at(col)));
        else
          cells.emplace_back("-");
      } else if (auto it = r.per_set_f1.find(col); it != r.per_set_f1.end()) {
        cells.push_back(format_f1(it->second));
      } else {
        cells.emplace_back("-");
      }
    }
    t.rows.emplace_back(r.run_id, std::move(cells));
  }
  return t;
}

}  // namespace mmfc::eval
