#include "mmfc/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mmfc/adapters.hpp"
#include "mmfc/anno.hpp"
#include "mmfc/dataset.hpp"
#include "mmfc/error.hpp"
#include "mmfc/eval.hpp"
#include "mmfc/explain.hpp"
#include "mmfc/jsonl.hpp"
#include "mmfc/mixture.hpp"
#include "mmfc/random.hpp"
#include "mmfc/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace mmfc::cli {

namespace {

// ---------------------------------------------------------------------------
// Option registry. Every option is captured as text so that flags, config
// file values and defaults resolve through one path.

struct OptionDef {
  std::string name;  // without dashes
  bool flag = false;
  std::optional<std::string> fallback;
  CLI::Option* handle = nullptr;
};

struct Command {
  CLI::App* app = nullptr;
  std::vector<OptionDef> options;
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;

  void option(const std::string& name, const std::string& desc, std::optional<std::string> fallback = {}) {
    auto* h = app->add_option("--" + name, text[name], desc);
    if (fallback) h->default_str(*fallback);
    options.push_back({name, false, std::move(fallback), h});
  }
  void flag(const std::string& name, const std::string& desc) {
    auto* h = app->add_flag("--" + name, flags[name], desc);
    options.push_back({name, true, std::nullopt, h});
  }
};

// Options that locate a run rather than define it; left out of the run id.
const std::set<std::string> kPlumbing{"config", "runs-dir", "run-id"};

class Params {
 public:
  explicit Params(json values) : values_(std::move(values)) {}

  const json& values() const { return values_; }
  bool has(const std::string& name) const { return values_.contains(name) && !values_[name].is_null(); }

  std::string str(const std::string& name) const {
    if (!has(name)) throw InvalidConfig("--" + name + " is required");
    return values_[name].get<std::string>();
  }
  std::optional<std::string> opt(const std::string& name) const {
    if (!has(name)) return std::nullopt;
    auto s = values_[name].get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
  }
  bool flag(const std::string& name) const { return has(name) && values_[name].get<bool>(); }

  long long integer(const std::string& name) const {
    const auto s = str(name);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw InvalidConfig("--" + name + " expects an integer, got '" + s + "'");
    return v;
  }
  std::uint64_t unsigned_integer(const std::string& name) const {
    const auto v = integer(name);
    if (v < 0) throw InvalidConfig("--" + name + " must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  double real(const std::string& name) const {
    const auto s = str(name);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
      throw InvalidConfig("--" + name + " expects a number, got '" + s + "'");
    return v;
  }

 private:
  json values_;
};

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

Params resolve(const Command& cmd, const nlohmann::json& file_params) {
  json values = json::object();
  for (const auto& o : cmd.options) {
    const bool given = o.handle->count() > 0;
    if (o.flag) {
      if (given)
        values[o.name] = cmd.flags.at(o.name);
      else if (file_params.contains(o.name))
        values[o.name] = file_params[o.name].is_boolean() ? file_params[o.name].get<bool>()
                                                           : scalar_text(file_params[o.name]) == "true";
      else
        values[o.name] = false;
    } else {
      if (given)
        values[o.name] = cmd.text.at(o.name);
      else if (file_params.contains(o.name) && !file_params[o.name].is_null())
        values[o.name] = scalar_text(file_params[o.name]);
      else if (o.fallback)
        values[o.name] = *o.fallback;
      else
        values[o.name] = nullptr;
    }
  }
  return Params(std::move(values));
}

nlohmann::json read_config_params(const fs::path& path, const std::string& command) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig("config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw InvalidConfig("config " + path.string() + " must be a JSON object");
  if (j.contains("parameters")) {
    if (j.contains("command") && j["command"] != command)
      throw InvalidConfig("config " + path.string() + " belongs to command '" +
                          j["command"].get<std::string>() + "'");
    j = j["parameters"];
  }
  if (!j.is_object()) throw InvalidConfig("config parameters must be a JSON object");
  return j;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Run context

struct Context {
  std::string command;
  Params params;
  std::string run_id;
  fs::path run_dir;
  std::ostream& out;
};

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& s) { write_file_atomic(path, s); }

/// Writes to the run directory and, when given, the user-chosen path as well.
void emit(const Context& ctx, const std::string& file_name, const std::string& contents,
          const std::optional<std::string>& extra = {}) {
  write_text(ctx.run_dir / file_name, contents);
  if (extra) {
    fs::path p(*extra);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text(p, contents);
  }
}

std::string examples_text(const std::vector<VerificationExample>& examples) {
  std::string s;
  for (const auto& ex : examples) {
    s += serialize(ex);
    s += '\n';
  }
  return s;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    auto item = s.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

std::vector<std::string> members_of(const Params& p) {
  if (auto m = p.opt("members")) return mixture::parse_member_list(*m);
  if (auto n = p.opt("name")) {
    auto s = mixture::members_from_name(*n);
    return {s.begin(), s.end()};
  }
  throw InvalidConfig("one of --members or --name is required");
}

// ---------------------------------------------------------------------------
// normalize

fs::path find_split_file(const fs::path& dir, Split split, NativeFormat format) {
  const std::string stem(split_name(split));
  const auto ext = format == NativeFormat::tsv ? ".tsv" : ".jsonl";
  for (const auto& candidate : {dir / (stem + ext), dir / (stem + (format == NativeFormat::tsv ? ".jsonl" : ".tsv"))})
    if (fs::exists(candidate)) return candidate;
  return {};
}

int cmd_normalize(Context& ctx) {
  const auto& p = ctx.params;
  const auto key = p.str("dataset");
  const fs::path input = p.str("input");
  NormalizeOptions opts;
  opts.strict_images = p.flag("strict-images");
  if (auto s = p.opt("split")) opts.split = parse_split(*s);

  const bool unified = key == "unified";
  const auto format = unified ? NativeFormat::jsonl : adapter_info(key).format;

  std::vector<VerificationExample> examples;
  if (fs::is_directory(input)) {
    fs::path dir = fs::is_directory(input / key) ? input / key : input;
    opts.image_root = p.opt("image-root") ? fs::path(*p.opt("image-root")) : dir;
    bool found = false;
    for (auto split : {Split::train, Split::val, Split::test}) {
      auto file = find_split_file(dir, split, format);
      if (file.empty()) continue;
      found = true;
      auto split_opts = opts;
      split_opts.split = split;
      auto part = normalize_file(file, unified ? "unified" : key, split_opts);
      examples.insert(examples.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    if (!found) throw MissingDataset("no train/val/test files under " + dir.string());
  } else if (fs::exists(input)) {
    opts.image_root = p.opt("image-root") ? fs::path(*p.opt("image-root")) : input.parent_path();
    examples = normalize_file(input, unified ? "unified" : key, opts);
  } else {
    throw MissingDataset("input not found: " + input.string());
  }

  const std::string out_key = unified ? (examples.empty() ? "unified" : examples.front().dataset) : key;
  Dataset(out_key, examples).validate();
  emit(ctx, out_key + ".jsonl", examples_text(examples), p.opt("output"));
  ctx.out << "normalized " << examples.size() << " " << out_key << " examples (train "
          << Dataset(out_key, examples).size(Split::train) << ", val "
          << Dataset(out_key, examples).size(Split::val) << ", test "
          << Dataset(out_key, examples).size(Split::test) << ")\n";

  if (p.flag("temporal-partitions")) {
    eval::PartitionOptions popts;
    popts.seed = p.unsigned_integer("seed");
    popts.sample_size = static_cast<std::size_t>(p.unsigned_integer("partition-size"));
    if (auto kw = p.opt("keywords")) {
      popts.keywords.clear();
      for (auto& k : split_csv(*kw)) {
        for (auto& c : k) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        popts.keywords.push_back(k);
      }
    }
    const auto pool_mode = p.str("partition-pool");
    if (pool_mode != "test" && pool_mode != "all") throw InvalidConfig("--partition-pool must be test or all");
    std::vector<VerificationExample> pool;
    for (const auto& ex : examples)
      if (pool_mode == "all" || ex.split == Split::test) pool.push_back(ex);
    auto parts = eval::build_temporal_partitions(pool, popts);
    for (const auto& [tk, part] : parts) {
      const std::string name = std::string(eval::temporal_name(tk)) + ".jsonl";
      std::optional<std::string> extra;
      if (auto o = p.opt("output")) extra = (fs::path(*o).parent_path() / name).string();
      emit(ctx, name, examples_text(part), extra);
      ctx.out << "partition " << eval::temporal_name(tk) << ": " << part.size() << " examples\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// mix

int cmd_mix(Context& ctx) {
  const auto& p = ctx.params;
  if (auto k = p.opt("enumerate")) {
    const auto pool = p.opt("pool") ? split_csv(*p.opt("pool")) : std::vector<std::string>{};
    if (pool.empty()) throw InvalidConfig("--enumerate needs --pool");
    auto specs = mixture::enumerate_mixtures(static_cast<std::size_t>(p.unsigned_integer("enumerate")), pool);
    std::string tsv = "mixture\tmembers\n";
    for (const auto& s : specs) {
      std::string members;
      for (const auto& m : s.members) members += (members.empty() ? "" : ",") + m;
      tsv += s.name + "\t" + members + "\n";
      ctx.out << s.name << "\n";
    }
    emit(ctx, "mixtures.tsv", tsv, p.opt("output"));
    return 0;
  }

  const auto store = DataStore::load_dir(p.str("data"));
  auto spec = mixture::make_spec(members_of(p), mixture::parse_sampling(p.str("sampling")),
                                 p.unsigned_integer("seed"));
  const auto split = parse_split(p.str("split"));
  const auto stream = mixture::build(spec, store, split, p.unsigned_integer("epoch"));

  json info;
  info["name"] = spec.name;
  info["members"] = spec.members;
  info["sampling"] = mixture::sampling_name(spec.sampling);
  info["seed"] = spec.seed;
  info["label_space"] = spec.label_space.to_string();
  info["split"] = split_name(split);
  info["size"] = stream.size();
  json counts = json::object();
  for (const auto& m : spec.members) counts[m] = store.at(m).size(split);
  info["member_sizes"] = std::move(counts);
  write_json(ctx.run_dir / "mixture.json", info);
  emit(ctx, "mixture.jsonl", examples_text(stream), p.opt("output"));
  ctx.out << spec.name << ": " << stream.size() << " " << split_name(split) << " examples\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

verifier::TrainConfig train_config(const Params& p) {
  verifier::TrainConfig cfg;
  cfg.epochs = static_cast<int>(p.integer("epochs"));
  cfg.batch_size = static_cast<int>(p.integer("batch-size"));
  cfg.micro_batch = static_cast<int>(p.integer("micro-batch"));
  cfg.lr = p.real("lr");
  cfg.optimizer = verifier::parse_optimizer(p.str("optimizer"));
  cfg.aggregation = verifier::parse_aggregation(p.str("aggregation"));
  cfg.weight_decay = p.real("weight-decay");
  cfg.hidden = static_cast<std::size_t>(p.unsigned_integer("hidden"));
  cfg.stance = static_cast<std::size_t>(p.unsigned_integer("stance"));
  cfg.seed = p.unsigned_integer("seed");
  cfg.validate();
  return cfg;
}

int cmd_train(Context& ctx) {
  const auto& p = ctx.params;
  auto store = DataStore::load_dir(p.str("data"));
  const auto cfg = train_config(p);
  auto spec = mixture::make_spec(members_of(p), mixture::parse_sampling(p.str("sampling")), cfg.seed);

  json augmentation = nullptr;
  if (auto file = p.opt("explanations")) {
    const auto scenario = explain::parse_scenario(p.str("scenario"));
    const auto records = explain::read_explanations(*file);
    std::size_t added = 0;
    for (const auto& key : spec.members) {
      const auto& ds = store.at(key);
      std::vector<VerificationExample> rebuilt;
      for (const auto& ex : ds.examples()) {
        if (ex.split != Split::train) {
          rebuilt.push_back(ex);
          continue;
        }
        auto aug = explain::augment(std::span(&ex, 1), records, scenario, p.flag("strict-augment"));
        added += aug.front().evidence.size() - ex.evidence.size();
        rebuilt.push_back(std::move(aug.front()));
      }
      store.add(Dataset(key, std::move(rebuilt)));
    }
    augmentation = {{"explanations", *file}, {"scenario", explain::scenario_name(scenario)}, {"silver_items", added}};
    ctx.out << "augmented training data with " << added << " silver evidence items\n";
  }

  const auto backend = p.str("backend");
  const auto encoder_seed = p.unsigned_integer("encoder-seed");
  const auto encoder = verifier::make_encoder(backend, encoder_seed);

  auto result = verifier::train(spec, store, cfg, *encoder);
  for (const auto& m : result.log) {
    ctx.out << "epoch " << m.epoch << " loss " << eval::format_f1(m.train_loss);
    for (const auto& [k, v] : m.val_f1) ctx.out << " " << k << "=" << eval::format_f1(v);
    ctx.out << "\n";
  }

  json ckpt;
  ckpt["backend"] = backend;
  ckpt["encoder_seed"] = encoder_seed;
  ckpt["embed_dim"] = encoder->info().embed_dim;
  ckpt["mixture"] = spec.name;
  ckpt["members"] = spec.members;
  ckpt["sampling"] = mixture::sampling_name(spec.sampling);
  ckpt["train"] = cfg.to_json();
  ckpt["augmentation"] = augmentation;
  verifier::save_checkpoint(ctx.run_dir / "checkpoint", result.params, ckpt, result.log);
  ctx.out << "checkpoint " << (ctx.run_dir / "checkpoint").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// explain

VeracityLabel label_from_word(const std::string& word) {
  for (auto l : kAllLabels)
    if (label_word(l) == word) return l;
  throw InvalidConfig("unknown label word: " + word);
}

int cmd_explain(Context& ctx) {
  const auto& p = ctx.params;
  const auto store = DataStore::load_dir(p.str("data"));
  const auto key = p.str("dataset");
  auto examples = store.at(key).split(parse_split(p.str("split")));
  if (const auto limit = p.unsigned_integer("limit"); limit > 0 && limit < examples.size())
    examples.resize(limit);
  if (examples.empty()) throw EmptySplit(key + " has no " + p.str("split") + " examples");

  const auto scenario = explain::parse_scenario(p.str("scenario"));
  explain::ScenarioOptions sopts;
  sopts.seed = p.unsigned_integer("seed");
  sopts.opposite_of_nei = label_from_word(p.str("opposite-nei"));

  std::unique_ptr<explain::LlmClient> client;
  if (p.flag("stub"))
    client = std::make_unique<explain::StubClient>(p.opt("stub-reply"));
  else
    client = std::make_unique<explain::OpenAiClient>();

  explain::GenerateOptions gopts;
  gopts.generator = p.str("generator");
  gopts.concurrency = static_cast<std::size_t>(p.unsigned_integer("concurrency"));
  gopts.max_retries = static_cast<int>(p.integer("max-retries"));
  if (auto b = p.opt("budget")) gopts.budget = static_cast<std::size_t>(p.unsigned_integer("budget"));

  explain::ZeroShotStats zstats;
  std::vector<VeracityLabel> zero_preds, zero_golds;
  std::vector<explain::ExplanationRequest> requests;
  for (const auto& ex : examples) {
    std::optional<VeracityLabel> zero_shot;
    const auto evidence = evidence_text(ex);
    if (scenario == explain::Scenario::guided) {
      zero_shot = explain::zero_shot_predict(ex.claim, evidence, *client, gopts.generator, zstats);
      zero_preds.push_back(*zero_shot);
      zero_golds.push_back(ex.label);
    }
    const auto gold = explain::needs_gold(scenario) ? std::optional(ex.label) : std::nullopt;
    for (auto label : explain::choose_label(explain::view_of(ex), gold, scenario, sopts, zero_shot))
      requests.push_back({ex.id, ex.claim, evidence, label, scenario});
  }

  explain::ExplanationCache cache;
  std::vector<explain::ExplanationRecord> previous;
  if (auto c = p.opt("cache"); c && fs::exists(*c)) {
    previous = explain::read_explanations(*c);
    cache.load(*c);
  }

  explain::GenerateStats stats;
  auto records = explain::generate(requests, *client, cache, gopts, &stats);

  std::string jsonl;
  {
    const auto tmp = ctx.run_dir / "explanations.jsonl";
    explain::write_explanations(tmp, records);
    jsonl = read_file(tmp);
  }
  if (auto o = p.opt("output")) emit(ctx, "explanations.jsonl", jsonl, *o);

  if (auto c = p.opt("cache")) {
    std::map<explain::ExplanationCache::Key, explain::ExplanationRecord> merged;
    for (const auto* list : {&previous, &records})
      for (const auto& r : *list)
        merged[{r.claim_id, code(r.conditioning_label), r.generator, r.prompt_hash}] = r;
    std::vector<explain::ExplanationRecord> all;
    for (auto& [k, r] : merged) all.push_back(r);
    if (fs::path(*c).has_parent_path()) fs::create_directories(fs::path(*c).parent_path());
    explain::write_explanations(*c, all);
  }

  std::size_t over = 0;
  for (const auto& r : records) over += r.over_word_limit ? 1 : 0;
  json s;
  s["claims"] = examples.size();
  s["explanations"] = records.size();
  s["client_calls"] = stats.client_calls;
  s["cache_hits"] = stats.cache_hits;
  s["retries"] = stats.retries;
  s["retry_log"] = stats.retry_log;
  s["over_word_limit"] = over;
  if (scenario == explain::Scenario::guided) {
    s["zero_shot_unparseable"] = zstats.unparseable;
    s["zero_shot_f1"] = eval::f1(zero_preds, zero_golds);
  }
  write_json(ctx.run_dir / "explain_stats.json", s);
  ctx.out << records.size() << " " << explain::scenario_name(scenario) << " explanations for " << examples.size()
          << " claims (" << stats.client_calls << " client calls, " << stats.cache_hits << " cache hits)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval / report

fs::path report_path(const fs::path& p) { return fs::is_directory(p) ? p / "report.json" : p; }

eval::EvalReport load_report(const fs::path& p) {
  const auto path = report_path(p);
  if (!fs::exists(path)) throw MissingDataset("no eval report at " + path.string());
  try {
    return eval::EvalReport::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation("malformed eval report " + path.string() + ": " + e.what());
  }
}

void emit_tables(Context& ctx, std::span<const eval::EvalReport> reports) {
  const auto f1 = eval::report_table(reports, false);
  write_text(ctx.run_dir / "report.tsv", f1.to_tsv());
  write_text(ctx.run_dir / "report.txt", f1.to_text());
  ctx.out << f1.to_text();
  const bool any_delta = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.delta_f1.has_value(); });
  if (any_delta) {
    const auto d = eval::report_table(reports, true);
    write_text(ctx.run_dir / "deltas.tsv", d.to_tsv());
    write_text(ctx.run_dir / "deltas.txt", d.to_text());
    ctx.out << "\n" << d.to_text();
  }
}

int cmd_eval(Context& ctx) {
  const auto& p = ctx.params;
  const auto store = DataStore::load_dir(p.str("data"));
  fs::path ckpt_dir = p.str("checkpoint");
  if (fs::is_directory(ckpt_dir / "checkpoint")) ckpt_dir /= "checkpoint";  // a train run directory
  const auto ckpt = verifier::load_checkpoint(ckpt_dir);
  const auto& c = ckpt.config;
  const auto backend = c.value("backend", std::string("toy"));
  auto encoder = std::shared_ptr<const verifier::Encoder>(
      verifier::make_encoder(backend, c.value("encoder_seed", std::uint64_t{0})));
  const auto cfg = verifier::TrainConfig::from_json(c.value("train", nlohmann::json::object()));
  verifier::Verifier model(ckpt.params, cfg.aggregation, encoder);

  const auto averaging = eval::parse_averaging(p.str("averaging"));
  const auto keys = eval::parse_eval_sets(p.str("eval-sets"));
  eval::RunMetrics run{ctx.run_id, eval::evaluate_sets(model, store, keys, averaging)};

  std::optional<eval::RunMetrics> baseline;
  if (auto b = p.opt("baseline")) {
    auto base = load_report(*b);
    baseline = eval::RunMetrics{base.run_id, base.per_set_f1};
  }
  auto rep = eval::report(run, baseline, averaging);
  const auto text = rep.to_json().dump(2) + "\n";
  emit(ctx, "report.json", text, p.opt("output"));
  std::vector<eval::EvalReport> reports{rep};
  emit_tables(ctx, reports);
  return 0;
}

std::vector<std::vector<std::string>> read_tsv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingDataset("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

int cmd_report(Context& ctx) {
  const auto& p = ctx.params;
  const auto averaging = eval::parse_averaging(p.str("averaging"));
  std::vector<eval::EvalReport> reports;

  if (auto scores = p.opt("scores")) {
    const auto rows = read_tsv_rows(*scores);
    if (rows.size() < 2) throw EmptyInput(*scores + " has no score rows");
    const auto& header = rows.front();
    std::vector<eval::RunMetrics> runs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != header.size())
        throw SchemaViolation(*scores + " row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                              " cells, header has " + std::to_string(header.size()));
      eval::RunMetrics m{rows[r][0], {}};
      for (std::size_t c = 1; c < header.size(); ++c) {
        if (rows[r][c].empty() || rows[r][c] == "-") continue;
        char* end = nullptr;
        const double v = std::strtod(rows[r][c].c_str(), &end);
        if (end != rows[r][c].c_str() + rows[r][c].size())
          throw SchemaViolation("not a number in " + *scores + ": '" + rows[r][c] + "'");
        m.f1[header[c]] = v;
      }
      runs.push_back(std::move(m));
    }
    std::optional<eval::RunMetrics> baseline;
    if (auto b = p.opt("baseline-row")) {
      auto it = std::find_if(runs.begin(), runs.end(), [&](const auto& m) { return m.run_id == *b; });
      if (it == runs.end()) throw InvalidConfig("baseline row '" + *b + "' not found in " + *scores);
      baseline = *it;
      runs.erase(it);
    }
    for (const auto& m : runs) reports.push_back(eval::report(m, baseline, averaging));
  } else if (auto inputs = p.opt("inputs")) {
    std::optional<eval::RunMetrics> baseline;
    if (auto b = p.opt("baseline")) {
      auto base = load_report(*b);
      baseline = eval::RunMetrics{base.run_id, base.per_set_f1};
    }
    for (const auto& path : split_csv(*inputs)) {
      auto r = load_report(path);
      reports.push_back(baseline ? eval::report({r.run_id, r.per_set_f1}, baseline, r.averaging) : r);
    }
  } else {
    throw InvalidConfig("one of --inputs or --scores is required");
  }

  json all = json::array();
  for (const auto& r : reports) all.push_back(r.to_json());
  write_json(ctx.run_dir / "reports.json", all);
  emit_tables(ctx, reports);
  if (auto o = p.opt("output")) {
    fs::create_directories(*o);
    for (const char* f : {"report.tsv", "report.txt", "deltas.tsv", "deltas.txt", "reports.json"})
      if (fs::exists(ctx.run_dir / f)) fs::copy_file(ctx.run_dir / f, fs::path(*o) / f, fs::copy_options::overwrite_existing);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// anno

int cmd_anno(Context& ctx) {
  const auto& p = ctx.params;
  const auto rows = anno::read_annotations(p.str("input"));
  auto sets = anno::group(rows);
  if (const auto n = p.unsigned_integer("raters"); n > 0) anno::check_complete(sets, n);

  const auto question = anno::parse_question(p.str("question"));
  auto filter = anno::filter_annotators(sets, p.real("threshold"), question);
  auto kept = anno::restrict_to(sets, filter.kept);
  auto rep = anno::summarize(kept, filter);
  emit(ctx, "anno_report.json", rep.to_json().dump(2) + "\n", p.opt("output"));

  ctx.out << sets.size() << " annotated explanations, removed " << filter.removed.size() << " annotator(s)\n";
  for (const auto& g : rep.generators) {
    char line[256];
    std::snprintf(line, sizeof line, "%s: items=%zu predictability=%.4f quality=%.2f\n", g.generator.c_str(), g.items,
                  g.predictability, g.quality_mean);
    ctx.out << line;
  }
  return 0;
}

// ---------------------------------------------------------------------------

void add_common(Command& c) {
  c.option("config", "JSON config file; flags override its values");
  c.option("runs-dir", "directory holding run outputs", "runs");
  c.option("run-id", "explicit run id (default: content hash)");
  c.option("seed", "random seed", "0");
}

void single_line(std::string& s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
}

void print_error(std::ostream& err, std::string_view category, std::string_view kind, std::string message) {
  single_line(message);
  err << "error: category=" << category << " kind=" << kind << " message=" << message << "\n";
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal fact-checking toolkit: dataset normalization, mixtures, verifier training, "
               "explanation augmentation, evaluation and annotation aggregation."};
  app.name("mmfc");
  app.require_subcommand(1);

  std::map<std::string, Command> commands;
  auto make = [&](const std::string& name, const std::string& desc) -> Command& {
    auto& c = commands[name];
    c.app = app.add_subcommand(name, desc);
    add_common(c);
    return c;
  };

  {
    auto& c = make("normalize", "convert a native dataset export into unified JSONL");
    c.option("dataset", "adapter key (fak, moc, ...) or 'unified'");
    c.option("input", "native file or directory with train/val/test files");
    c.option("output", "also write the JSONL here");
    c.option("split", "split for files without a split column");
    c.option("image-root", "base directory for relative image paths");
    c.flag("strict-images", "fail on image references that do not resolve");
    c.flag("temporal-partitions", "also build the pre / pos / ukr evaluation partitions");
    c.option("partition-size", "examples per temporal partition", "1000");
    c.option("keywords", "comma-separated topic keywords for ukr");
    c.option("partition-pool", "examples eligible for partitions: test | all", "test");
  }
  {
    auto& c = make("mix", "build a dataset mixture stream");
    c.option("data", "directory of normalized <key>.jsonl files");
    c.option("members", "comma-separated dataset keys");
    c.option("name", "mixture row name, e.g. 'FV + NGT + FK'");
    c.option("sampling", "concat | per_epoch_uniform", "concat");
    c.option("split", "split to draw", "train");
    c.option("epoch", "epoch index for the shuffle", "0");
    c.option("output", "also write the stream here");
    c.option("enumerate", "list every mixture of this size from --pool");
    c.option("pool", "comma-separated dataset keys for --enumerate");
  }
  {
    auto& c = make("train", "train the verifier on a mixture");
    c.option("data", "directory of normalized <key>.jsonl files");
    c.option("members", "comma-separated dataset keys");
    c.option("name", "mixture row name, e.g. 'FV + NGT + FK'");
    c.option("sampling", "concat | per_epoch_uniform", "concat");
    c.option("backend", "toy | clip-base | clip-large | clip-large-336 | llava", "toy");
    c.option("encoder-seed", "seed of the frozen encoder", "0");
    c.option("epochs", "training epochs", "50");
    c.option("batch-size", "examples per optimizer update", "2048");
    c.option("micro-batch", "examples per accumulation step", "256");
    c.option("lr", "learning rate", "0.001");
    c.option("optimizer", "adam | adamw", "adam");
    c.option("weight-decay", "adamw weight decay", "0.01");
    c.option("aggregation", "mean | max | attention", "mean");
    c.option("hidden", "hidden width", "128");
    c.option("stance", "stance width", "128");
    c.option("explanations", "explanations JSONL to append as silver evidence");
    c.option("scenario", "scenario of the explanations to use", "oracle");
    c.flag("strict-augment", "fail when a training claim has no explanation");
  }
  {
    auto& c = make("explain", "generate explanations for a dataset split");
    c.option("data", "directory of normalized <key>.jsonl files");
    c.option("dataset", "dataset key", "moc");
    c.option("split", "split to explain", "train");
    c.option("scenario", "oracle | opposite | random | all | always_supports | always_refutes | always_nei | guided");
    c.option("generator", "generator model name", "gpt-4o");
    c.option("budget", "maximum number of client calls");
    c.flag("stub", "use the offline stub client (no network)");
    c.option("stub-reply", "fixed zero-shot reply for the stub client");
    c.option("concurrency", "parallel requests", "4");
    c.option("max-retries", "retries per request on transient failures", "5");
    c.option("cache", "explanations JSONL used and updated as a cache");
    c.option("limit", "explain at most this many claims (0 = all)", "0");
    c.option("opposite-nei", "label used by the opposite scenario for nei claims", "nei");
    c.option("output", "also write the explanations here");
  }
  {
    auto& c = make("eval", "evaluate a checkpoint on the eval sets");
    c.option("checkpoint", "checkpoint directory or train run directory");
    c.option("data", "directory of normalized <key>.jsonl files");
    c.option("eval-sets", "all or comma-separated eval-set keys", "all");
    c.option("averaging", "macro | micro | weighted", "macro");
    c.option("baseline", "baseline report.json or eval run directory");
    c.option("output", "also write report.json here");
  }
  {
    auto& c = make("anno", "aggregate human annotations of explanations");
    c.option("input", "annotation TSV export");
    c.option("question", "question used for annotator filtering", "Q6");
    c.option("threshold", "filter annotators while kappa is below this (<= 0 disables)", "0.2");
    c.option("raters", "expected responses per question and item (0 skips the check)", "5");
    c.option("output", "also write the report here");
  }
  {
    auto& c = make("report", "combine eval reports into F1 and delta tables");
    c.option("inputs", "comma-separated report.json files or eval run directories");
    c.option("baseline", "baseline report.json for deltas");
    c.option("scores", "TSV of F1 scores: row label, then one column per eval set");
    c.option("baseline-row", "row of --scores used as the baseline");
    c.option("averaging", "averaging recorded in the reports", "macro");
    c.option("output", "also copy the tables into this directory");
  }

  std::vector<std::string> argv_storage{"mmfc"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string kind = "BadArguments";
    if (dynamic_cast<const CLI::ExtrasError*>(&e)) kind = "UnknownArgument";
    else if (dynamic_cast<const CLI::RequiredError*>(&e)) kind = "MissingArgument";
    print_error(err, "UsageError", kind, e.what());
    const CLI::App* failing = &app;
    for (const auto& [name, c] : commands)
      if (c.app->parsed()) failing = c.app;
    err << failing->help();
    return exit_code(ErrorCategory::usage);
  }

  std::string name;
  Command* cmd = nullptr;
  for (auto& [n, c] : commands)
    if (c.app->parsed()) {
      name = n;
      cmd = &c;
    }

  try {
    nlohmann::json file_params = nlohmann::json::object();
    if (!cmd->text["config"].empty()) file_params = read_config_params(cmd->text["config"], name);
    auto params = resolve(*cmd, file_params);

    json hashed = json::object();
    for (const auto& [k, v] : params.values().items())
      if (!kPlumbing.contains(k)) hashed[k] = v;
    const auto seed = params.unsigned_integer("seed");
    std::string run_id = params.opt("run-id").value_or(
        sha256_hex(name + "\n" + hashed.dump() + "\n" + std::to_string(seed)).substr(0, 16));
    const fs::path run_dir = fs::path(params.str("runs-dir")) / run_id;
    fs::create_directories(run_dir);

    json config;
    config["run_id"] = run_id;
    config["command"] = name;
    config["parameters"] = hashed;
    config["seed"] = seed;
    config["created_at"] = utc_now();
    write_json(run_dir / "config.json", config);

    Context ctx{name, std::move(params), run_id, run_dir, out};
    int rc = 0;
    if (name == "normalize") rc = cmd_normalize(ctx);
    else if (name == "mix") rc = cmd_mix(ctx);
    else if (name == "train") rc = cmd_train(ctx);
    else if (name == "explain") rc = cmd_explain(ctx);
    else if (name == "eval") rc = cmd_eval(ctx);
    else if (name == "anno") rc = cmd_anno(ctx);
    else if (name == "report") rc = cmd_report(ctx);
    out << "run " << run_dir.string() << "\n";
    return rc;
  } catch (const Error& e) {
    print_error(err, category_name(e.category()), e.kind(), e.what());
    return exit_code(e.category());
  } catch (const nlohmann::json::exception& e) {
    print_error(err, category_name(ErrorCategory::data), "SchemaViolation", e.what());
    return exit_code(ErrorCategory::data);
  } catch (const fs::filesystem_error& e) {
    print_error(err, category_name(ErrorCategory::data), "FilesystemError", e.what());
    return exit_code(ErrorCategory::data);
  } catch (const std::exception& e) {
    print_error(err, "InternalError", "Exception", e.what());
    return 1;
  }
}

}  // namespace mmfc::cli
