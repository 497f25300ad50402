#include "mmfc/schema.hpp"

#include <charconv>
#include <cstdio>

#include "mmfc/error.hpp"

namespace mmfc {

VeracityLabel label_from_code(int c) {
  if (c < 0 || c > 2) throw UnknownLabel("label code out of range: " + std::to_string(c));
  return static_cast<VeracityLabel>(c);
}

std::string_view label_word(VeracityLabel l) {
  switch (l) {
    case VeracityLabel::supported: return "supported";
    case VeracityLabel::refuted: return "refuted";
    case VeracityLabel::nei: return "nei";
  }
  return "nei";
}

std::string_view domain_name(DomainTag d) {
  switch (d) {
    case DomainTag::misinformation: return "misinformation";
    case DomainTag::toxicity: return "toxicity";
    case DomainTag::stance: return "stance";
  }
  return "misinformation";
}

DomainTag parse_domain(std::string_view s) {
  if (s == "misinformation") return DomainTag::misinformation;
  if (s == "toxicity") return DomainTag::toxicity;
  if (s == "stance") return DomainTag::stance;
  throw SchemaViolation("unknown domain: " + std::string(s));
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val" || s == "dev" || s == "validation") return Split::val;
  if (s == "test") return Split::test;
  throw SchemaViolation("unknown split: " + std::string(s));
}

std::string_view kind_name(EvidenceItem::Kind k) {
  return k == EvidenceItem::Kind::image ? "image" : "text";
}

namespace {

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
  int v = 0;
  auto sub = s.substr(pos, len);
  auto [p, ec] = std::from_chars(sub.data(), sub.data() + sub.size(), v);
  if (ec != std::errc() || p != sub.data() + sub.size())
    throw SchemaViolation("malformed date: " + std::string(s));
  return v;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace

Date Date::parse(std::string_view iso) {
  // Accepts a trailing time part ("2021-03-01T12:00:00Z") and ignores it.
  if (iso.size() < 10 || iso[4] != '-' || iso[7] != '-')
    throw SchemaViolation("malformed date: " + std::string(iso));
  Date d{parse_fixed(iso, 0, 4), parse_fixed(iso, 5, 2), parse_fixed(iso, 8, 2)};
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (d.month < 1 || d.month > 12) throw SchemaViolation("bad month: " + std::string(iso));
  int max_day = kDays[d.month - 1] + (d.month == 2 && leap(d.year) ? 1 : 0);
  if (d.day < 1 || d.day > max_day) throw SchemaViolation("bad day: " + std::string(iso));
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string evidence_text(const VerificationExample& ex, bool include_silver) {
  std::string out;
  for (const auto& e : ex.evidence) {
    if (e.kind != EvidenceItem::Kind::text || e.content.empty()) continue;
    if (e.silver && !include_silver) continue;
    if (!out.empty()) out += '\n';
    out += e.content;
  }
  return out;
}

}  // namespace mmfc
