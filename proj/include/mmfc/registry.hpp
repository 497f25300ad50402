#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmfc/schema.hpp"

namespace mmfc {

/// Set of VeracityLabel codes, stored as a 3-bit mask.
class LabelSpace {
 public:
  constexpr LabelSpace() = default;
  constexpr LabelSpace(std::initializer_list<VeracityLabel> labels) {
    for (auto l : labels) insert(l);
  }

  static constexpr LabelSpace binary() { return {VeracityLabel::supported, VeracityLabel::refuted}; }
  static constexpr LabelSpace ternary() {
    return {VeracityLabel::supported, VeracityLabel::refuted, VeracityLabel::nei};
  }

  constexpr void insert(VeracityLabel l) { bits_ |= static_cast<std::uint8_t>(1u << code(l)); }
  constexpr bool contains(VeracityLabel l) const { return (bits_ >> code(l)) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool is_binary() const { return bits_ == binary().bits_; }
  constexpr LabelSpace operator|(LabelSpace o) const {
    LabelSpace r;
    r.bits_ = bits_ | o.bits_;
    return r;
  }
  constexpr bool operator==(const LabelSpace&) const = default;

  std::vector<VeracityLabel> labels() const;
  std::string to_string() const;  // "{0,1,2}"

 private:
  std::uint8_t bits_ = 0;
};

struct SplitSizes {
  std::optional<std::size_t> train;
  std::optional<std::size_t> val;
  std::optional<std::size_t> test;
};

struct DatasetDescriptor {
  std::string key;           // "moc", "fak", ...
  std::string abbreviation;  // row label used in mixture tables, e.g. "MC"
  std::string full_name;
  DomainTag domain = DomainTag::misinformation;
  LabelSpace label_space;
  bool has_evidence = false;
  bool multimodal = false;
  bool eval_set = false;   // one of the 12 evaluation sets
  bool train_set = false;  // usable as a mixture member
  SplitSizes splits;       // known reference sizes only
};

/// All known datasets, in a fixed order. Immutable.
std::span<const DatasetDescriptor> registry();

/// Throws UnknownDataset.
const DatasetDescriptor& descriptor(std::string_view key);
const DatasetDescriptor* find_descriptor(std::string_view key) noexcept;
const DatasetDescriptor& descriptor_by_abbreviation(std::string_view abbrev);

/// The 12 evaluation-set keys in reporting order.
std::span<const std::string_view> eval_set_keys();

}  // namespace mmfc
