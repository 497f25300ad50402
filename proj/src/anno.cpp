#include "mmfc/anno.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include "mmfc/adapters.hpp"

namespace mmfc::anno {

namespace {

constexpr std::string_view kBinary[] = {"no", "yes"};
constexpr std::string_view kPredict[] = {"true", "false", "unprovable", "no"};
constexpr std::string_view kScale[] = {"1", "2", "3", "4", "5"};

std::string trim_lower(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t category_index(Question q, std::string_view value) {
  const auto cats = categories(q);
  auto it = std::find(cats.begin(), cats.end(), value);
  if (it == cats.end())
    throw SchemaViolation("'" + std::string(value) + "' is not a " + std::string(question_name(q)) + " category");
  return static_cast<std::size_t>(it - cats.begin());
}

VeracityLabel parse_label_cell(std::string_view raw) {
  const auto s = trim_lower(raw);
  if (s == "0" || s == "supported" || s == "supports") return VeracityLabel::supported;
  if (s == "1" || s == "refuted" || s == "refutes") return VeracityLabel::refuted;
  if (s == "2" || s == "nei" || s == "not enough info") return VeracityLabel::nei;
  throw UnknownLabel("unknown conditioning label: " + std::string(raw));
}

}  // namespace

std::string_view question_name(Question q) {
  switch (q) {
    case Question::q1: return "Q1";
    case Question::q2: return "Q2";
    case Question::q3: return "Q3";
    case Question::q4: return "Q4";
    case Question::q5: return "Q5";
    case Question::q6: return "Q6";
  }
  return "Q1";
}

Question parse_question(std::string_view s) {
  const auto lower = trim_lower(s);
  for (auto q : kAllQuestions)
    if (trim_lower(question_name(q)) == lower) return q;
  throw SchemaViolation("unknown question: " + std::string(s));
}

std::span<const std::string_view> categories(Question q) {
  switch (q) {
    case Question::q5: return kPredict;
    case Question::q6: return kScale;
    default: return kBinary;
  }
}

std::string normalize_response(Question q, std::string_view raw) {
  auto s = trim_lower(raw);
  constexpr std::string_view kPrefix = "the label is ";
  if (q == Question::q5 && s.starts_with(kPrefix)) s = trim_lower(std::string_view(s).substr(kPrefix.size()));
  category_index(q, s);
  return s;
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path) {
  std::vector<Annotation> out;
  std::size_t row = 0;
  for (const auto& j : read_native(path, NativeFormat::tsv)) {
    ++row;
    auto field = [&](const char* name) -> std::string {
      if (!j.contains(name)) throw MissingField(path.string() + " row " + std::to_string(row) + ": " + name);
      return j[name].get<std::string>();
    };
    Annotation a;
    a.item_id = field("item_id");
    a.generator = field("generator");
    a.annotator_id = field("annotator_id");
    a.question = parse_question(field("question"));
    a.response = normalize_response(a.question, field("response"));
    if (j.contains("label") && !j["label"].get<std::string>().empty())
      a.label = parse_label_cell(j["label"].get<std::string>());
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AnnotationSet> group(std::span<const Annotation> rows) {
  std::vector<AnnotationSet> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    auto [it, fresh] = index.try_emplace({r.item_id, r.generator}, out.size());
    if (fresh) out.push_back({r.item_id, r.generator, r.label, {}});
    auto& set = out[it->second];
    if (r.label) {
      if (set.label && *set.label != *r.label)
        throw SchemaViolation("conflicting labels for " + r.item_id + " / " + r.generator);
      set.label = r.label;
    }
    set.answers[r.question].push_back({r.annotator_id, r.response});
  }
  return out;
}

void check_complete(std::span<const AnnotationSet> sets, std::size_t n) {
  for (const auto& s : sets)
    for (auto q : kAllQuestions) {
      auto it = s.answers.find(q);
      const std::size_t got = it == s.answers.end() ? 0 : it->second.size();
      if (got != n)
        throw SchemaViolation(s.item_id + " / " + s.generator + " has " + std::to_string(got) + " " +
                              std::string(question_name(q)) + " answers, expected " + std::to_string(n));
    }
}

std::string majority(Question q, std::span<const std::string> responses) {
  if (responses.empty()) throw EmptyInput("majority of an empty response list");
  const auto cats = categories(q);
  std::vector<std::size_t> counts(cats.size(), 0);
  for (const auto& r : responses) ++counts[category_index(q, r)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return std::string(cats[best]);
}

std::string_view q5_category(VeracityLabel gold) {
  switch (gold) {
    case VeracityLabel::supported: return "true";
    case VeracityLabel::refuted: return "false";
    case VeracityLabel::nei: return "unprovable";
  }
  return "unprovable";
}

bool predictability(std::span<const std::string> q5, VeracityLabel gold) {
  const auto want = q5_category(gold);
  return std::any_of(q5.begin(), q5.end(), [&](const std::string& r) { return r == want; });
}

// ---------------------------------------------------------------------------
// Agreement

double fleiss_kappa(const CountMatrix& counts) {
  if (counts.empty()) throw EmptyInput("empty count matrix");
  const std::size_t k = counts.front().size();
  long n = -1;
  for (const auto& row : counts) {
    if (row.size() != k) throw RaggedMatrix("rows have different category counts");
    long sum = 0;
    for (int c : row) {
      if (c < 0) throw RaggedMatrix("negative count");
      sum += c;
    }
    if (n < 0) n = sum;
    if (sum != n) throw RaggedMatrix("rows sum to different rater counts");
  }
  if (n < 2) throw RaggedMatrix("need at least two raters per item");
  return fleiss_kappa_general(counts);
}

double fleiss_kappa_general(const CountMatrix& counts) {
  std::size_t k = 0;
  for (const auto& row : counts) k = std::max(k, row.size());
  std::vector<double> totals(k, 0.0);
  double p_bar = 0.0;
  double ratings = 0.0;
  std::size_t items = 0;
  for (const auto& row : counts) {
    double n = 0.0, sq = 0.0;
    for (int c : row) {
      n += c;
      sq += static_cast<double>(c) * c;
    }
    if (n < 2) continue;
    p_bar += (sq - n) / (n * (n - 1.0));
    for (std::size_t j = 0; j < row.size(); ++j) totals[j] += row[j];
    ratings += n;
    ++items;
  }
  if (items == 0) throw EmptyInput("no item has two or more ratings");
  p_bar /= static_cast<double>(items);
  double p_e = 0.0;
  for (double t : totals) p_e += (t / ratings) * (t / ratings);
  if (p_e >= 1.0 - 1e-12) throw DegenerateAgreement("all ratings fall in one category");
  return (p_bar - p_e) / (1.0 - p_e);
}

CountMatrix count_matrix(std::span<const AnnotationSet> sets, Question q, const std::vector<std::string>* keep) {
  const auto k = categories(q).size();
  CountMatrix m;
  m.reserve(sets.size());
  for (const auto& s : sets) {
    std::vector<int> row(k, 0);
    if (auto it = s.answers.find(q); it != s.answers.end())
      for (const auto& r : it->second) {
        if (keep && !std::binary_search(keep->begin(), keep->end(), r.annotator_id)) continue;
        ++row[category_index(q, r.value)];
      }
    m.push_back(std::move(row));
  }
  return m;
}

namespace {

std::optional<double> try_kappa(std::span<const AnnotationSet> sets, Question q,
                                const std::vector<std::string>& keep) {
  try {
    return fleiss_kappa_general(count_matrix(sets, q, &keep));
  } catch (const DegenerateAgreement&) {
    return std::nullopt;
  } catch (const EmptyInput&) {
    return std::nullopt;
  }
}

}  // namespace

FilterReport filter_annotators(std::span<const AnnotationSet> sets, double threshold, Question q) {
  std::set<std::string> ids;
  for (const auto& s : sets)
    if (auto it = s.answers.find(q); it != s.answers.end())
      for (const auto& r : it->second) ids.insert(r.annotator_id);
  std::vector<std::string> keep(ids.begin(), ids.end());

  FilterReport rep;
  rep.question = q;
  rep.threshold = threshold;
  auto current = try_kappa(sets, q, keep);
  rep.initial_kappa = current.value_or(std::numeric_limits<double>::quiet_NaN());

  while (threshold > 0.0 && current && *current < threshold && keep.size() > 2) {
    std::optional<double> best;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      auto trial = keep;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
      auto kappa = try_kappa(sets, q, trial);
      if (kappa && (!best || *kappa > *best)) {  // strict: ties keep the smaller id
        best = kappa;
        best_idx = i;
      }
    }
    if (!best || *best <= *current) break;
    rep.removed.push_back(keep[best_idx]);
    rep.kappa_after.push_back(*best);
    keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(best_idx));
    current = best;
  }
  rep.final_kappa = current.value_or(std::numeric_limits<double>::quiet_NaN());
  rep.kept = std::move(keep);
  return rep;
}

std::vector<AnnotationSet> restrict_to(std::span<const AnnotationSet> sets, const std::vector<std::string>& keep) {
  std::vector<std::string> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  std::vector<AnnotationSet> out(sets.begin(), sets.end());
  for (auto& s : out)
    for (auto& [q, answers] : s.answers)
      std::erase_if(answers, [&](const Response& r) {
        return !std::binary_search(sorted.begin(), sorted.end(), r.annotator_id);
      });
  return out;
}

// ---------------------------------------------------------------------------
// Report

namespace {

std::vector<std::string> values_of(const AnnotationSet& s, Question q) {
  std::vector<std::string> out;
  if (auto it = s.answers.find(q); it != s.answers.end())
    for (const auto& r : it->second) out.push_back(r.value);
  return out;
}

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
}

}  // namespace

AnnoReport summarize(std::span<const AnnotationSet> sets, std::optional<FilterReport> filter) {
  AnnoReport rep;
  rep.filter = std::move(filter);
  std::vector<std::string> everyone;
  {
    std::set<std::string> ids;
    for (const auto& s : sets)
      for (const auto& [q, answers] : s.answers)
        for (const auto& r : answers) ids.insert(r.annotator_id);
    everyone.assign(ids.begin(), ids.end());
  }
  for (auto q : kAllQuestions) rep.kappa[q] = try_kappa(sets, q, everyone);

  std::map<std::string, std::vector<const AnnotationSet*>> by_gen;
  for (const auto& s : sets) by_gen[s.generator].push_back(&s);

  for (const auto& [gen, items] : by_gen) {
    GeneratorSummary g;
    g.generator = gen;
    g.items = items.size();
    std::size_t labelled = 0, correct = 0, predictable = 0;
    double q6_sum = 0.0;
    std::size_t q6_n = 0;
    for (const auto* s : items) {
      for (auto q : kAllQuestions) {
        auto vals = values_of(*s, q);
        if (!vals.empty()) ++g.majority_counts[q][majority(q, vals)];
      }
      auto q5 = values_of(*s, Question::q5);
      if (s->label && !q5.empty()) {
        ++labelled;
        if (majority(Question::q5, q5) == q5_category(*s->label)) ++correct;
        if (predictability(q5, *s->label)) ++predictable;
      }
      for (const auto& v : values_of(*s, Question::q6)) {
        q6_sum += std::stoi(v);
        ++q6_n;
      }
    }
    for (auto q : {Question::q1, Question::q2, Question::q3, Question::q4}) {
      const auto& counts = g.majority_counts[q];
      std::size_t total = 0;
      for (const auto& [v, c] : counts) total += c;
      auto yes = counts.find("yes");
      g.yes_rate[q] = total == 0 ? 0.0
                                 : static_cast<double>(yes == counts.end() ? 0 : yes->second) /
                                       static_cast<double>(total);
    }
    g.q5_majority_correct = labelled == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(labelled);
    g.predictability = labelled == 0 ? 0.0 : static_cast<double>(predictable) / static_cast<double>(labelled);
    g.quality_mean = q6_n == 0 ? 0.0 : q6_sum / static_cast<double>(q6_n);
    rep.generators.push_back(std::move(g));
  }
  return rep;
}

nlohmann::ordered_json AnnoReport::to_json() const {
  nlohmann::ordered_json j;
  if (filter) {
    nlohmann::ordered_json f;
    f["question"] = question_name(filter->question);
    f["threshold"] = filter->threshold;
    f["initial_kappa"] = number_or_null(filter->initial_kappa);
    f["final_kappa"] = number_or_null(filter->final_kappa);
    f["removed"] = filter->removed;
    f["kappa_after"] = filter->kappa_after;
    f["kept"] = filter->kept;
    j["filter"] = std::move(f);
  } else {
    j["filter"] = nullptr;
  }
  nlohmann::ordered_json k = nlohmann::ordered_json::object();
  for (auto q : kAllQuestions) {
    auto it = kappa.find(q);
    k[std::string(question_name(q))] =
        it != kappa.end() && it->second ? nlohmann::ordered_json(*it->second) : nlohmann::ordered_json();
  }
  j["kappa"] = std::move(k);

  nlohmann::ordered_json gens = nlohmann::ordered_json::array();
  for (const auto& g : generators) {
    nlohmann::ordered_json o;
    o["generator"] = g.generator;
    o["items"] = g.items;
    nlohmann::ordered_json maj = nlohmann::ordered_json::object();
    for (auto q : kAllQuestions) {
      nlohmann::ordered_json counts = nlohmann::ordered_json::object();
      if (auto it = g.majority_counts.find(q); it != g.majority_counts.end())
        for (auto cat : categories(q))
          if (auto c = it->second.find(std::string(cat)); c != it->second.end()) counts[std::string(cat)] = c->second;
      maj[std::string(question_name(q))] = std::move(counts);
    }
    o["majority_counts"] = std::move(maj);
    nlohmann::ordered_json yes = nlohmann::ordered_json::object();
    for (const auto& [q, r] : g.yes_rate) yes[std::string(question_name(q))] = r;
    o["yes_rate"] = std::move(yes);
    o["q5_majority_correct"] = g.q5_majority_correct;
    o["predictability"] = g.predictability;
    o["quality_mean"] = g.quality_mean;
    gens.push_back(std::move(o));
  }
  j["generators"] = std::move(gens);
  return j;
}

}  // namespace mmfc::anno
