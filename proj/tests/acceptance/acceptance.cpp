// Acceptance gate. Each criterion prints exactly one line:
//   CRITERION <n> PASS: <detail>   or   CRITERION <n> FAIL: <detail>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmfc/adapters.hpp"
#include "mmfc/anno.hpp"
#include "mmfc/eval.hpp"
#include "mmfc/explain.hpp"
#include "mmfc/jsonl.hpp"
#include "mmfc/metrics.hpp"
#include "mmfc/mixture.hpp"
#include "mmfc/train.hpp"
#include "support.hpp"

using namespace mmfc;
namespace fs = std::filesystem;
using L = VeracityLabel;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, '\t')) cols.push_back(c);
    rows.push_back(cols);
  }
  return rows;
}

// ---------------------------------------------------------------------------

Verdict delta_table() {
  const auto ref = test::source_path("data/reference_results");
  std::map<std::string, std::map<std::pair<std::string, std::string>, double>> f1;  // gen -> (backbone, scenario)
  for (const std::string gen : {"gpt-4o", "gpt-3.5-turbo"})
    for (const auto& r : read_tsv(ref / ("mocheg_f1_" + gen + ".tsv"))) f1[gen][{r[0], r[1]}] = std::stod(r[2]);

  std::size_t ok = 0, total = 0;
  std::vector<std::string> problems;
  for (const auto& r : read_tsv(ref / "delta_table.tsv")) {
    ++total;
    const auto& backbone = r[0];
    const auto& gen = r[1];
    const auto& scenario = r[2];
    const double want = std::stod(r[3]);
    const auto& table = f1[gen];
    auto run = table.find({backbone, scenario});
    auto base = table.find({backbone, "baseline"});
    const std::string cell = backbone + "/" + gen + "/" + scenario;
    if (run == table.end() || base == table.end()) {
      problems.push_back(cell + " no source F1");
      continue;
    }
    auto rep = eval::report({cell, {{"moc", run->second}}}, eval::RunMetrics{"baseline", {{"moc", base->second}}});
    const double got = std::stod(eval::format_delta(rep.delta_f1->at("moc")));
    if (std::abs(got - want) <= 0.01 + 1e-9)
      ++ok;
    else
      problems.push_back(cell + " got " + eval::format_delta(got) + " want " + r[3]);
  }
  std::string detail = std::to_string(ok) + "/" + std::to_string(total) + " delta cells within 0.01";
  for (const auto& p : problems) detail += "; " + p;
  return {ok == total && total > 0, detail};
}

Verdict label_mapping() {
  Rng rng(2024);
  std::size_t agree = 0;
  const std::size_t n = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    verifier::VeracityPrediction pred;
    std::vector<double> w{rng.uniform(), rng.uniform(), rng.uniform()};
    if (i % 8 == 0) w[1] = w[0];
    const double s = w[0] + w[1] + w[2];
    for (auto& x : w) x /= s;
    pred.probs = w;
    pred.label = label_from_code(static_cast<int>(rng.below(3)));
    // Brute force: candidates in code order, keep the first with maximal mass.
    L want = pred.label;
    if (pred.label == L::nei) {
      std::vector<std::pair<double, int>> cands{{w[0], 0}, {w[1], 1}};
      std::stable_sort(cands.begin(), cands.end(), [](auto a, auto b) { return a.first > b.first; });
      want = label_from_code(cands[0].second);
    }
    agree += eval::map_prediction(pred, LabelSpace::binary()) == want;
  }
  return {agree == n, std::to_string(agree) + "/" + std::to_string(n) + " cases agree"};
}

double kappa_by_pairs(const anno::CountMatrix& m) {
  std::vector<double> totals(m.front().size(), 0.0);
  double po = 0.0, ratings = 0.0;
  for (const auto& row : m) {
    double n = 0.0, agree_pairs = 0.0;
    for (int c : row) n += c;
    for (std::size_t j = 0; j < row.size(); ++j) {
      agree_pairs += static_cast<double>(row[j]) * (row[j] - 1);
      totals[j] += row[j];
    }
    po += agree_pairs / (n * (n - 1));
    ratings += n;
  }
  po /= static_cast<double>(m.size());
  double pe = 0.0;
  for (double t : totals) pe += (t / ratings) * (t / ratings);
  return (po - pe) / (1 - pe);
}

Verdict kappa() {
  std::vector<std::string> notes;
  bool pass = true;
  const double perfect = anno::fleiss_kappa({{5, 0, 0}, {0, 5, 0}, {0, 0, 5}, {5, 0, 0}});
  pass &= std::abs(perfect - 1.0) < 1e-12;
  notes.push_back("perfect " + fmt("%.6f", perfect));

  const anno::CountMatrix book{{0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0},
                               {2, 2, 8, 1, 1},  {7, 7, 0, 0, 0}, {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2},
                               {6, 5, 2, 1, 0},  {0, 2, 2, 3, 7}};
  const double k_book = anno::fleiss_kappa(book);
  const double k_indep = kappa_by_pairs(book);
  pass &= std::abs(k_book - k_indep) < 1e-3 && std::abs(k_book - 0.210) < 1e-3;
  notes.push_back("textbook " + fmt("%.4f", k_book) + " vs " + fmt("%.4f", k_indep));

  const double k_small = anno::fleiss_kappa({{2, 2}, {2, 2}});
  pass &= std::abs(k_small - (-1.0 / 3.0)) < 1e-9;
  notes.push_back("small " + fmt("%.9f", k_small));

  Rng rng(77);
  int invariant = 0, tried = 0;
  while (tried < 100) {
    const std::size_t items = 3 + rng.below(15), k = 2 + rng.below(4);
    const int n = 2 + static_cast<int>(rng.below(5));
    anno::CountMatrix m(items, std::vector<int>(k, 0));
    for (auto& row : m)
      for (int r = 0; r < n; ++r) ++row[rng.below(k)];
    double base;
    try {
      base = anno::fleiss_kappa(m);
    } catch (const DegenerateAgreement&) {
      continue;
    }
    ++tried;
    auto perm = m;
    rng.shuffle(std::span(perm));
    invariant += std::abs(anno::fleiss_kappa(perm) - base) < 1e-12;
  }
  pass &= invariant == 100;
  notes.push_back("permutation-invariant " + std::to_string(invariant) + "/100");

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {pass, detail};
}

Verdict learnability() {
  DataStore store;
  store.add(DataStore::load_one(test::source_path("data/fixtures/separable/moc.jsonl"), "moc"));
  verifier::ToyEncoder enc({.seed = 0, .dim = 64});
  verifier::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  cfg.micro_batch = 8;
  cfg.lr = 0.01;
  cfg.seed = 0;
  const auto spec = mixture::make_spec({"moc"});
  auto a = verifier::train(spec, store, cfg, enc);
  auto b = verifier::train(spec, store, cfg, enc);
  double best = 0.0;
  int epoch = 0;
  for (const auto& m : a.log)
    if (m.val_f1.at("moc") >= 95.0 && epoch == 0) epoch = m.epoch;
  for (const auto& m : a.log) best = std::max(best, m.val_f1.at("moc"));
  const bool deterministic = a.params.flatten() == b.params.flatten();
  return {epoch > 0 && deterministic,
          "val macro-F1 " + fmt("%.2f", a.log.back().val_f1.at("moc")) + "% after 5 epochs (best " +
              fmt("%.2f", best) + "%, >= 95% first at epoch " + std::to_string(epoch) + "), deterministic " +
              (deterministic ? "yes" : "no")};
}

Verdict gradients() {
  double worst = 0.0;
  const verifier::ModelDims dims{.embed = 8, .hidden = 12, .stance = 6, .classes = 3};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 1000);
    auto p = verifier::Params::init(dims, seed);
    verifier::Encoded x;
    x.claim = Eigen::VectorXd(8);
    for (int i = 0; i < 8; ++i) x.claim[i] = rng.normal();
    const auto n = rng.below(4);
    for (std::size_t k = 0; k < n; ++k) {
      Eigen::VectorXd e(8);
      for (int i = 0; i < 8; ++i) e[i] = rng.normal();
      x.evidence.push_back(e);
    }
    const auto agg = static_cast<verifier::Aggregation>(seed % 3);
    const auto y = label_from_code(static_cast<int>(seed % 3));
    worst = std::max(worst, verifier::gradcheck(p, agg, x, y, 200, seed));
  }
  return {worst < 1e-4, "max relative error " + fmt("%.3e", worst) + " over 20 seeds"};
}

Verdict scenarios() {
  using namespace explain;
  const auto claims = read_jsonl(test::source_path("data/fixtures/scenario/claims.jsonl"));
  std::vector<std::string> notes;
  bool pass = claims.size() == 500;
  ScenarioOptions o{.seed = 11};

  std::size_t oracle_ok = 0, opposite_ok = 0, non_nei = 0;
  for (const auto& ex : claims) {
    const auto chosen = choose_label(view_of(ex), ex.label, Scenario::oracle, o);
    const auto prompt = build_prompt(ex.claim, evidence_text(ex), chosen.at(0));
    oracle_ok += prompt.user.find("Relationship: " + std::string(label_word(ex.label))) != std::string::npos;
    if (ex.label != L::nei) {
      ++non_nei;
      const auto opp = choose_label(view_of(ex), ex.label, Scenario::opposite, o).at(0);
      opposite_ok += opp != ex.label && opp != L::nei;
    }
  }
  pass &= oracle_ok == claims.size() && opposite_ok == non_nei;
  notes.push_back("oracle " + std::to_string(oracle_ok) + "/" + std::to_string(claims.size()));
  notes.push_back("opposite " + std::to_string(opposite_ok) + "/" + std::to_string(non_nei));

  std::array<double, 3> counts{};
  for (int i = 0; i < 3000; ++i)
    ++counts[static_cast<std::size_t>(code(choose_label_blind({"chi-" + std::to_string(i), ""}, Scenario::random, o).at(0)))];
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  pass &= chi2 < 9.2103;
  notes.push_back("random chi2 " + fmt("%.3f", chi2) + " < 9.210");

  std::vector<ExplanationRequest> reqs;
  for (const auto& ex : claims)
    for (auto l : choose_label_blind(view_of(ex), Scenario::all, o))
      reqs.push_back({ex.id, ex.claim, evidence_text(ex), l, Scenario::all});
  StubClient stub;
  ExplanationCache cache;
  GenerateOptions g;
  g.sleep = [](std::chrono::milliseconds) {};
  const auto recs = generate(reqs, stub, cache, g);
  std::map<std::string, std::set<int>> per_claim;
  std::map<std::string, int> per_claim_n;
  for (const auto& r : recs) {
    per_claim[r.claim_id].insert(code(r.conditioning_label));
    ++per_claim_n[r.claim_id];
  }
  std::size_t three = 0;
  for (const auto& [id, labels] : per_claim) three += labels.size() == 3 && per_claim_n[id] == 3;
  pass &= three == claims.size();
  notes.push_back("all " + std::to_string(three) + " claims with 3 explanations");

  // Guided: run the full label path on a copy whose gold labels are rotated.
  // Identical output means the gold label was never read.
  auto guided_labels = [&](const std::vector<VerificationExample>& xs) {
    StubClient zs;
    ZeroShotStats st;
    std::vector<L> out;
    for (const auto& ex : xs) {
      const auto pred = zero_shot_predict(ex.claim, evidence_text(ex), zs, "gpt-4o", st);
      out.push_back(choose_label(view_of(ex), ex.label, Scenario::guided, o, pred).at(0));
    }
    return out;
  };
  auto rotated = claims;
  for (auto& ex : rotated) ex.label = label_from_code((code(ex.label) + 1) % 3);
  const bool blind = guided_labels(claims) == guided_labels(rotated);
  pass &= blind;
  notes.push_back(std::string("guided label-erased view ") + (blind ? "identical" : "DIFFERS"));

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {pass, detail};
}

Verdict prompt_bytes() {
  const auto dir = test::source_path("tests/fixtures/prompts");
  const auto cases = nlohmann::json::parse(test::slurp(dir / "cases.json"));
  const auto system = test::slurp(dir / "system.txt");
  std::size_t ok = 0;
  for (const std::string name : {"supported", "refuted", "nei"}) {
    const auto& c = cases[name];
    const auto word = c["label"].get<std::string>();
    const L label = word == "supported" ? L::supported : word == "refuted" ? L::refuted : L::nei;
    const auto p = explain::build_prompt(c["claim"].get<std::string>(), c["evidence"].get<std::string>(), label);
    ok += p.system == system && p.user == test::slurp(dir / (name + ".user.txt"));
  }
  return {ok == 3, std::to_string(ok) + "/3 prompts byte-identical"};
}

Verdict hygiene() {
  std::vector<std::string> notes;
  bool pass = true;

  Rng rng(8);
  std::size_t same = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto ex = test::random_example(rng, i);
    same += parse(serialize(ex)) == ex;
  }
  pass &= same == 1000;
  notes.push_back("round-trip " + std::to_string(same) + "/1000");

  DataStore store;
  std::size_t overlap = 0, fixture_sets = 0;
  for (const auto& key : adapter_keys()) {
    std::vector<VerificationExample> all;
    std::map<Split, std::set<std::string>> ids;
    for (auto split : kAllSplits) {
      const auto base = test::source_path("data/fixtures/native/" + key + "/" + std::string(split_name(split)));
      const auto file = fs::exists(base.string() + ".tsv") ? fs::path(base.string() + ".tsv") : fs::path(base.string() + ".jsonl");
      NormalizeOptions opts;
      opts.split = split;
      for (auto& ex : normalize_file(file, key, opts)) {
        ids[split].insert(ex.id);
        all.push_back(std::move(ex));
      }
    }
    for (const auto& id : ids[Split::train]) overlap += ids[Split::test].contains(id);
    store.add(Dataset(key, all));
    ++fixture_sets;
  }
  {
    const auto sep = read_jsonl(test::source_path("data/fixtures/separable/moc.jsonl"));
    std::set<std::string> train_ids, test_ids;
    for (const auto& ex : sep) (ex.split == Split::train ? train_ids : test_ids).insert(ex.id);
    for (const auto& id : train_ids) overlap += test_ids.contains(id);
    ++fixture_sets;
  }
  pass &= overlap == 0;
  notes.push_back("train/test id overlap " + std::to_string(overlap) + " across " + std::to_string(fixture_sets) +
                  " fixtures");

  const auto sum = store.at("fak").size(Split::train) + store.at("moc").size(Split::train);
  const auto built = mixture::build(mixture::make_spec({"fak", "moc"}), store, Split::train).size();
  pass &= built == sum;
  notes.push_back("|A+B| " + std::to_string(built) + " = " + std::to_string(sum));

  std::set<std::set<std::string>> table_rows;
  for (const auto& r : read_tsv(test::source_path("data/reference_results/mixtures_clip_base.tsv"))) {
    auto members = mixture::members_from_name(r[0]);
    if (members.size() == 3) table_rows.insert(members);
  }
  std::set<std::set<std::string>> enumerated;
  for (const auto& s : mixture::enumerate_mixtures(3, {"fak", "fv", "moc", "ngt", "ph", "vc"}))
    enumerated.insert({s.members.begin(), s.members.end()});
  std::size_t covered = 0;
  std::string missing;
  for (const auto& e : enumerated) {
    if (table_rows.contains(e)) {
      ++covered;
    } else {
      missing += (missing.empty() ? "" : "|") + mixture::canonical_name({e.begin(), e.end()});
    }
  }
  const bool equal = enumerated == table_rows;
  pass &= equal;
  notes.push_back("enumerate(3) " + std::to_string(enumerated.size()) + " sets vs " +
                  std::to_string(table_rows.size()) + " three-dataset table rows, " + std::to_string(covered) +
                  " shared" + (missing.empty() ? "" : ", absent from table: " + missing));

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {pass, detail};
}

Verdict partitions() {
  Rng rng(4242);
  std::vector<VerificationExample> pool;
  for (std::size_t i = 0; i < 5000; ++i) {
    VerificationExample ex;
    ex.id = "pool-" + std::to_string(i);
    ex.label = label_from_code(static_cast<int>(rng.below(2)));
    ex.dataset = "ngt";
    ex.split = Split::test;
    // Years weighted 3:1:3:3 so every partition has well over 1000 candidates.
    static constexpr int kYear[10] = {2019, 2019, 2019, 2020, 2021, 2021, 2021, 2022, 2022, 2022};
    const int year = kYear[rng.below(10)];
    ex.timestamp = Date{year, 1 + static_cast<int>(rng.below(12)), 1 + static_cast<int>(rng.below(28))};
    ex.claim = "headline " + std::to_string(i);
    const bool topical = year == 2022 ? rng.below(10) != 0 : rng.below(2) == 0;
    if (topical) ex.claim += " " + eval::kUkraineKeywords[rng.below(eval::kUkraineKeywords.size())];
    pool.push_back(std::move(ex));
  }
  eval::PartitionOptions o{.seed = 99, .sample_size = 1000};
  const auto a = eval::build_temporal_partitions(pool, o);
  const auto b = eval::build_temporal_partitions(pool, o);

  bool pass = true;
  std::set<std::string> seen;
  std::string sizes;
  for (auto key : eval::kTemporalKeys) {
    const auto& part = a.at(key);
    pass &= part.size() == 1000;
    sizes += std::string(sizes.empty() ? "" : "/") + std::to_string(part.size());
    for (const auto& ex : part) {
      pass &= eval::in_partition(ex, key, o);
      pass &= seen.insert(ex.id).second;
    }
  }
  std::string bytes_a, bytes_b;
  for (auto key : eval::kTemporalKeys) {
    for (const auto& ex : a.at(key)) bytes_a += serialize(ex) + "\n";
    for (const auto& ex : b.at(key)) bytes_b += serialize(ex) + "\n";
  }
  const bool same = bytes_a == bytes_b;
  pass &= same;
  return {pass, "sizes " + sizes + ", disjoint " + (seen.size() == 3000 ? "yes" : "no") + ", reproducible " +
                    (same ? "yes (sha256 " + sha256_hex(bytes_a).substr(0, 12) + ")" : "no")};
}

struct Step {
  std::string name;
  std::string args;
};

Verdict end_to_end() {
  test::TempDir dir("mmfc-e2e");
  const auto base = dir.path();
  const auto cli = test::cli_path();
  const auto native = test::source_path("data/fixtures/native").string();
  const std::string runs = (base / "runs").string();
  const std::string data = (base / "data").string();
  const std::string ckpt_args = " --epochs 4 --batch-size 32 --micro-batch 8 --lr 0.01 --hidden 32 --stance 32";

  const std::vector<Step> steps{
      {"normalize moc", "normalize --dataset moc --input " + native + " --output " + data + "/moc.jsonl"},
      {"normalize ph", "normalize --dataset ph --input " + native + " --output " + data + "/ph.jsonl"},
      {"mix", "mix --data " + data + " --members moc,ph --run-id mix"},
      {"train baseline", "train --data " + data + " --members moc,ph --run-id base" + ckpt_args},
      {"explain guided", "explain --data " + data + " --dataset moc --split train --scenario guided --stub --run-id expl"
                             " --output " + (base / "expl.jsonl").string()},
      {"train augmented", "train --data " + data + " --members moc,ph --run-id aug --scenario guided --explanations " +
                              (base / "expl.jsonl").string() + ckpt_args},
      {"eval baseline", "eval --data " + data + " --checkpoint " + runs + "/base/checkpoint --run-id eval-base"},
      {"eval augmented", "eval --data " + data + " --checkpoint " + runs + "/aug/checkpoint --run-id eval-aug --baseline " +
                             runs + "/eval-base/report.json"},
  };

  auto pipeline = [&](std::string& failure) -> std::optional<std::string> {
    fs::remove_all(runs);
    fs::remove_all(data);
    for (const auto& s : steps) {
      auto r = test::shell(cli + " " + s.args + " --runs-dir " + runs + " --seed 7");
      if (r.code != 0) {
        auto msg = r.out.substr(0, r.out.find('\n'));
        failure = s.name + " exit " + std::to_string(r.code) + ": " + msg;
        return std::nullopt;
      }
    }
    return test::slurp(fs::path(runs) / "eval-aug/report.json");
  };

  const auto t0 = std::chrono::steady_clock::now();
  std::string failure;
  auto first = pipeline(failure);
  if (!first) return {false, failure};
  auto second = pipeline(failure);
  if (!second) return {false, "second run: " + failure};
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  eval::EvalReport rep;
  try {
    rep = eval::EvalReport::from_json(nlohmann::json::parse(*first));
  } catch (const std::exception& e) {
    return {false, std::string("report.json malformed: ") + e.what()};
  }
  const bool well_formed = rep.delta_f1.has_value() && rep.per_set_f1.contains("moc") && rep.per_set_f1.contains("ph");
  const bool deterministic = *first == *second;
  const bool fast = secs < 300.0;
  std::string detail = "2 runs of 8 steps exit 0 in " + fmt("%.1f", secs) + " s, report " +
                       (well_formed ? "well-formed" : "INCOMPLETE") + ", moc F1 " + fmt("%.2f", rep.per_set_f1["moc"]) +
                       " delta " + (rep.delta_f1 && rep.delta_f1->contains("moc") ? eval::format_delta(rep.delta_f1->at("moc")) : "?") +
                       ", byte-identical " + (deterministic ? "yes" : "no");
  return {well_formed && deterministic && fast, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "criterion number 1-10")->required()->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::pair<double, std::function<Verdict()>>> checks{
      {1, {1.0, delta_table}},   {2, {1.0, label_mapping}}, {3, {60.0, kappa}},
      {4, {120.0, learnability}}, {5, {60.0, gradients}},   {6, {60.0, scenarios}},
      {7, {60.0, prompt_bytes}},  {8, {60.0, hygiene}},     {9, {60.0, partitions}},
      {10, {300.0, end_to_end}},
  };
  const auto& [limit, check] = checks.at(criterion);
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= limit) {
    v.pass = false;
    v.detail += "; runtime " + fmt("%.2f", secs) + " s over the " + fmt("%.0f", limit) + " s limit";
  } else {
    v.detail += " [" + fmt("%.2f", secs) + " s]";
  }
  std::printf("CRITERION %d %s: %s\n", criterion, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  return v.pass ? 0 : 1;
}
