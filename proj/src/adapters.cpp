#include "mmfc/adapters.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>

#include "mmfc/error.hpp"
#include "mmfc/jsonl.hpp"
#include "mmfc/registry.hpp"

namespace mmfc {

using nlohmann::json;

namespace {

using enum VeracityLabel;

std::string lower_trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  std::ranges::transform(out, out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string as_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.dump();
}

const json* lookup(const json& raw, std::string_view name) {
  auto it = raw.find(std::string(name));
  if (it == raw.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string field(const json& raw, std::string_view name, std::string_view adapter) {
  const json* v = lookup(raw, name);
  if (!v) throw MissingField(std::string(adapter) + ": missing field \"" + std::string(name) + "\"");
  return as_text(*v);
}

std::string optional_field(const json& raw, std::string_view name) {
  const json* v = lookup(raw, name);
  return v ? as_text(*v) : std::string{};
}

// Per-adapter record builder; fills claim, evidence, timestamp. The generic
// wrapper handles id, label, split, dataset and domain.
using Builder = std::function<void(const json& raw, VerificationExample& ex, const NormalizeOptions&)>;

struct Adapter {
  AdapterInfo info;
  std::string id_field;
  Builder build;
};

void add_image(VerificationExample& ex, const std::string& ref, const NormalizeOptions& opts) {
  if (ref.empty()) return;
  if (opts.strict_images) {
    bool url = ref.starts_with("http://") || ref.starts_with("https://");
    if (!url) {
      std::filesystem::path p(ref);
      if (p.is_relative() && !opts.image_root.empty()) p = opts.image_root / p;
      if (!std::filesystem::is_regular_file(p))
        throw BadImageRef(ex.dataset + "/" + ex.id + ": unresolvable image " + ref);
    }
  }
  ex.evidence.push_back(EvidenceItem::image(ref));
}

void add_text(VerificationExample& ex, std::string body) {
  if (!body.empty()) ex.evidence.push_back(EvidenceItem::text(std::move(body)));
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) pos = s.size();
    auto piece = s.substr(start, pos - start);
    if (!piece.empty()) out.emplace_back(piece);
    start = pos + 1;
  }
  return out;
}

const std::map<std::string, VeracityLabel> kFeverTable{
    {"supports", supported}, {"refutes", refuted}, {"not enough info", nei}};

std::vector<Adapter> make_adapters() {
  std::vector<Adapter> a;
  a.push_back({{"fak", NativeFormat::tsv, {"id", "clean_title", "2_way_label"}, "2_way_label",
                {{"1", supported}, {"0", refuted}, {"true", supported}, {"fake", refuted}}},
               "id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions& o) {
                 ex.claim = field(raw, "clean_title", "fak");
                 add_image(ex, optional_field(raw, "image_path"), o);
               }});
  a.push_back({{"moc",
                NativeFormat::tsv,
                {"claim_id", "Claim", "Evidence", "cleaned_truthfulness"},
                "cleaned_truthfulness",
                {{"supported", supported},
                 {"refuted", refuted},
                 {"nei", nei},
                 {"not enough info", nei}}},
               "claim_id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions& o) {
                 ex.claim = field(raw, "Claim", "moc");
                 add_text(ex, field(raw, "Evidence", "moc"));
                 for (const auto& img : split_on(optional_field(raw, "image_paths"), ';'))
                   add_image(ex, img, o);
               }});
  a.push_back({{"ph",
                NativeFormat::tsv,
                {"claim_id", "claim", "main_text", "label"},
                "label",
                {{"true", supported}, {"false", refuted}, {"mixture", nei}, {"unproven", nei}}},
               "claim_id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions&) {
                 ex.claim = field(raw, "claim", "ph");
                 add_text(ex, field(raw, "main_text", "ph"));
               }});
  a.push_back({{"fv", NativeFormat::jsonl, {"id", "claim", "evidence", "label"}, "label", kFeverTable},
               "id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions&) {
                 ex.claim = field(raw, "claim", "fv");
                 const json& ev = raw.at("evidence");
                 if (ev.is_array()) {
                   for (const auto& s : ev) add_text(ex, as_text(s));
                 } else {
                   add_text(ex, as_text(ev));
                 }
               }});
  a.push_back({{"vc", NativeFormat::jsonl, {"unique_id", "claim", "evidence", "label"}, "label",
                kFeverTable},
               "unique_id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions&) {
                 ex.claim = field(raw, "claim", "vc");
                 add_text(ex, field(raw, "evidence", "vc"));
               }});
  // Source-reliability labels; "mixed" (1) has no place in the binary space.
  a.push_back({{"ngt",
                NativeFormat::jsonl,
                {"id", "title", "date", "label"},
                "label",
                {{"reliable", supported}, {"0", supported}, {"unreliable", refuted}, {"2", refuted}}},
               "id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions&) {
                 ex.claim = field(raw, "title", "ngt");
                 ex.timestamp = Date::parse(field(raw, "date", "ngt"));
               }});
  a.push_back({{"mrf", NativeFormat::tsv, {"id", "headline", "gold_label"}, "gold_label",
                {{"real", supported}, {"misinfo", refuted}, {"misinformation", refuted}}},
               "id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions&) {
                 ex.claim = field(raw, "headline", "mrf");
               }});
  a.push_back({{"ham", NativeFormat::jsonl, {"id", "img", "text", "label"}, "label",
                {{"0", supported}, {"1", refuted}}},
               "id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions& o) {
                 ex.claim = field(raw, "text", "ham");
                 add_image(ex, field(raw, "img", "ham"), o);
               }});
  a.push_back({{"mmh",
                NativeFormat::tsv,
                {"id", "tweet_text", "img_path", "label"},
                "label",
                {{"nothate", supported},
                 {"racist", refuted},
                 {"sexist", refuted},
                 {"homophobe", refuted},
                 {"religion", refuted},
                 {"otherhate", refuted}}},
               "id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions& o) {
                 ex.claim = field(raw, "tweet_text", "mmh");
                 add_image(ex, field(raw, "img_path", "mmh"), o);
               }});
  a.push_back({{"hax", NativeFormat::jsonl, {"post_id", "post_tokens", "label"}, "label",
                {{"normal", supported}, {"offensive", refuted}, {"hatespeech", refuted}}},
               "post_id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions&) {
                 const json& toks = raw.at("post_tokens");
                 if (toks.is_array()) {
                   for (const auto& t : toks) {
                     if (!ex.claim.empty()) ex.claim += ' ';
                     ex.claim += as_text(t);
                   }
                 } else {
                   ex.claim = as_text(toks);
                 }
               }});
  a.push_back({{"tox",
                NativeFormat::tsv,
                {"id", "text", "label"},
                "label",
                {{"benign", supported}, {"neutral", supported}, {"toxic", refuted}, {"hate", refuted}}},
               "id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions&) {
                 ex.claim = field(raw, "text", "tox");
               }});
  // The stance target is carried as the single text evidence item.
  a.push_back({{"pst", NativeFormat::tsv, {"id", "tweet", "target", "label"}, "label",
                {{"favor", supported}, {"against", refuted}}},
               "id",
               [](const json& raw, VerificationExample& ex, const NormalizeOptions&) {
                 ex.claim = field(raw, "tweet", "pst");
                 add_text(ex, field(raw, "target", "pst"));
               }});
  return a;
}

const std::vector<Adapter>& adapters() {
  static const std::vector<Adapter> kAdapters = make_adapters();
  return kAdapters;
}

const Adapter& find_adapter(std::string_view key) {
  for (const auto& a : adapters())
    if (a.info.key == key) return a;
  throw UnknownDataset("no adapter for dataset key: " + std::string(key));
}

const AdapterInfo kUnifiedInfo{"unified", NativeFormat::jsonl,
                               {"id", "claim", "evidence", "label", "dataset", "domain", "split"},
                               "label",
                               {}};

std::string unescape_tsv(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char n = s[i + 1];
      if (n == 't') { out += '\t'; ++i; continue; }
      if (n == 'n') { out += '\n'; ++i; continue; }
      if (n == '\\') { out += '\\'; ++i; continue; }
    }
    out += s[i];
  }
  return out;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cols.push_back(unescape_tsv(line.substr(start)));
      break;
    }
    cols.push_back(unescape_tsv(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cols;
}

}  // namespace

const AdapterInfo& adapter_info(std::string_view key) {
  if (key == "unified") return kUnifiedInfo;
  return find_adapter(key).info;
}

std::vector<std::string> adapter_keys() {
  std::vector<std::string> keys;
  for (const auto& a : adapters()) keys.push_back(a.info.key);
  return keys;
}

VerificationExample normalize(const json& raw, std::string_view adapter, const NormalizeOptions& opts) {
  if (!raw.is_object()) throw SchemaViolation("raw record is not an object");
  if (adapter == "unified") return from_json(raw, true);

  const Adapter& a = find_adapter(adapter);
  const DatasetDescriptor& d = descriptor(adapter);
  for (const auto& f : a.info.required_fields)
    if (!lookup(raw, f)) throw MissingField(std::string(adapter) + ": missing field \"" + f + "\"");

  VerificationExample ex;
  ex.dataset = d.key;
  ex.domain = d.domain;
  ex.id = field(raw, a.id_field, adapter);
  if (ex.id.empty()) throw MissingField(std::string(adapter) + ": empty id");

  if (const json* s = lookup(raw, "split"))
    ex.split = parse_split(lower_trim(as_text(*s)));
  else if (opts.split)
    ex.split = *opts.split;
  else
    throw MissingField(std::string(adapter) + ": no split column and no split given");

  auto native = lower_trim(field(raw, a.info.label_field, adapter));
  auto it = a.info.label_table.find(native);
  if (it == a.info.label_table.end())
    throw UnknownLabel(std::string(adapter) + "/" + ex.id + ": native label \"" + native +
                       "\" not in mapping table v" + std::string(kLabelMapVersion));
  ex.label = it->second;

  a.build(raw, ex, opts);
  return ex;
}

std::vector<json> read_native(const std::filesystem::path& path, NativeFormat format) {
  std::ifstream in(path);
  if (!in) throw MissingDataset("cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  if (format == NativeFormat::jsonl) {
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        rows.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        throw SchemaViolation(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return rows;
  }
  if (!std::getline(in, line)) return rows;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_tabs(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != header.size())
      throw SchemaViolation(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " columns, got " +
                            std::to_string(cols.size()));
    json row = json::object();
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = std::move(cols[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<VerificationExample> normalize_file(const std::filesystem::path& path,
                                                std::string_view adapter,
                                                const NormalizeOptions& opts) {
  const auto& info = adapter_info(adapter);
  std::vector<VerificationExample> out;
  for (const auto& raw : read_native(path, info.format)) out.push_back(normalize(raw, adapter, opts));
  return out;
}

}  // namespace mmfc
