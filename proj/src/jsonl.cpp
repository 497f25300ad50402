#include "mmfc/jsonl.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mmfc/error.hpp"

namespace mmfc {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const VerificationExample& ex) {
  ordered_json j;
  j["id"] = ex.id;
  j["claim"] = ex.claim;
  ordered_json ev = ordered_json::array();
  for (const auto& e : ex.evidence) {
    ordered_json item;
    item["kind"] = kind_name(e.kind);
    item["content"] = e.content;
    item["silver"] = e.silver;
    ev.push_back(std::move(item));
  }
  j["evidence"] = std::move(ev);
  j["label"] = code(ex.label);
  j["dataset"] = ex.dataset;
  j["domain"] = domain_name(ex.domain);
  j["split"] = split_name(ex.split);
  j["timestamp"] = ex.timestamp ? ordered_json(ex.timestamp->iso()) : ordered_json(nullptr);
  return j;
}

namespace {

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaViolation(std::string("missing key \"") + key + "\"");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw SchemaViolation(std::string("key \"") + key + "\" must be a string");
  return v.get<std::string>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  std::set<std::string_view> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items())
    if (!ok.contains(k)) throw SchemaViolation(std::string("unknown key \"") + k + "\" in " + what);
}

}  // namespace

VerificationExample from_json(const json& j, bool strict) {
  if (!j.is_object()) throw SchemaViolation("record is not a JSON object");
  if (strict)
    reject_unknown(j, {"id", "claim", "evidence", "label", "dataset", "domain", "split", "timestamp"},
                   "record");

  VerificationExample ex;
  ex.id = require_string(j, "id");
  if (ex.id.empty()) throw SchemaViolation("empty id");
  ex.claim = require_string(j, "claim");

  const auto& ev = require(j, "evidence");
  if (!ev.is_array()) throw SchemaViolation("\"evidence\" must be an array");
  for (const auto& item : ev) {
    if (!item.is_object()) throw SchemaViolation("evidence item is not an object");
    if (strict) reject_unknown(item, {"kind", "content", "silver"}, "evidence item");
    EvidenceItem e;
    auto kind = require_string(item, "kind");
    if (kind == "text")
      e.kind = EvidenceItem::Kind::text;
    else if (kind == "image")
      e.kind = EvidenceItem::Kind::image;
    else
      throw SchemaViolation("unknown evidence kind: " + kind);
    e.content = require_string(item, "content");
    if (auto it = item.find("silver"); it != item.end()) {
      if (!it->is_boolean()) throw SchemaViolation("\"silver\" must be a boolean");
      e.silver = it->get<bool>();
    }
    ex.evidence.push_back(std::move(e));
  }

  const auto& label = require(j, "label");
  if (!label.is_number_integer()) throw SchemaViolation("\"label\" must be an integer code");
  try {
    ex.label = label_from_code(label.get<int>());
  } catch (const UnknownLabel& e) {
    throw SchemaViolation(e.what());
  }
  ex.dataset = require_string(j, "dataset");
  ex.domain = parse_domain(require_string(j, "domain"));
  ex.split = parse_split(require_string(j, "split"));
  if (auto it = j.find("timestamp"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaViolation("\"timestamp\" must be a string or null");
    ex.timestamp = Date::parse(it->get<std::string>());
  } else if (strict && it == j.end()) {
    throw SchemaViolation("missing key \"timestamp\"");
  }
  return ex;
}

std::string serialize(const VerificationExample& ex) { return to_json(ex).dump(); }

VerificationExample parse(std::string_view line, bool strict) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaViolation(std::string("malformed JSON: ") + e.what());
  }
  return from_json(j, strict);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingDataset("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<VerificationExample> read_jsonl(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw MissingDataset("cannot open " + path.string());
  std::vector<VerificationExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(parse(line, strict));
    } catch (const SchemaViolation& e) {
      throw SchemaViolation(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", ErrorCategory::data, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("IoError", ErrorCategory::data, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<VerificationExample>& examples) {
  std::string buf;
  for (const auto& ex : examples) {
    buf += serialize(ex);
    buf += '\n';
  }
  write_file_atomic(path, buf);
}

}  // namespace mmfc
