#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmfc {

/// Shared veracity label space. The integer codes are part of every on-disk
/// format and must never be reordered.
enum class VeracityLabel : std::uint8_t { supported = 0, refuted = 1, nei = 2 };

inline constexpr std::array<VeracityLabel, 3> kAllLabels{
    VeracityLabel::supported, VeracityLabel::refuted, VeracityLabel::nei};

constexpr int code(VeracityLabel l) { return static_cast<int>(l); }
VeracityLabel label_from_code(int code);  // throws UnknownLabel
std::string_view label_word(VeracityLabel l);  // "supported" | "refuted" | "nei"

enum class DomainTag : std::uint8_t { misinformation, toxicity, stance };
std::string_view domain_name(DomainTag d);
DomainTag parse_domain(std::string_view s);

enum class Split : std::uint8_t { train, val, test };
inline constexpr std::array<Split, 3> kAllSplits{Split::train, Split::val, Split::test};
std::string_view split_name(Split s);
Split parse_split(std::string_view s);

/// Calendar date without time zone, ISO-8601 on the wire.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  static Date parse(std::string_view iso);  // "YYYY-MM-DD", throws SchemaViolation
  std::string iso() const;
  auto operator<=>(const Date&) const = default;
};

struct EvidenceItem {
  enum class Kind : std::uint8_t { text, image };

  Kind kind = Kind::text;
  std::string content;  // text body, or an image path / URL
  bool silver = false;  // true only for generated explanations

  static EvidenceItem text(std::string body, bool silver = false) {
    return {Kind::text, std::move(body), silver};
  }
  static EvidenceItem image(std::string ref) { return {Kind::image, std::move(ref), false}; }

  bool operator==(const EvidenceItem&) const = default;
};

std::string_view kind_name(EvidenceItem::Kind k);

struct VerificationExample {
  std::string id;
  std::string claim;
  std::vector<EvidenceItem> evidence;
  VeracityLabel label = VeracityLabel::nei;
  std::string dataset;
  DomainTag domain = DomainTag::misinformation;
  Split split = Split::train;
  std::optional<Date> timestamp;

  bool operator==(const VerificationExample&) const = default;
};

/// Concatenates the non-empty text evidence bodies, newline separated.
/// Image items are skipped.
std::string evidence_text(const VerificationExample& ex, bool include_silver = false);

}  // namespace mmfc
