#include "mmfc/registry.hpp"

#include <array>

#include "mmfc/error.hpp"

namespace mmfc {

std::vector<VeracityLabel> LabelSpace::labels() const {
  std::vector<VeracityLabel> out;
  for (auto l : kAllLabels)
    if (contains(l)) out.push_back(l);
  return out;
}

std::string LabelSpace::to_string() const {
  std::string s = "{";
  for (auto l : labels()) {
    if (s.size() > 1) s += ',';
    s += std::to_string(code(l));
  }
  return s + "}";
}

namespace {

using enum DomainTag;

DatasetDescriptor make(std::string key, std::string abbrev, std::string name, DomainTag domain,
                       LabelSpace space, bool evidence, bool multimodal, bool eval, bool train,
                       SplitSizes sizes = {}) {
  return {std::move(key), std::move(abbrev), std::move(name), domain, space, evidence,
          multimodal,     eval,              train,           sizes};
}

const std::vector<DatasetDescriptor>& table() {
  static const std::vector<DatasetDescriptor> kTable = [] {
    const auto bin = LabelSpace::binary();
    const auto tri = LabelSpace::ternary();
    return std::vector<DatasetDescriptor>{
        make("fak", "FK", "Fakeddit", misinformation, bin, true, true, true, true,
             {.train = 1'063'106}),
        make("ham", "HM", "HatefulMemes", toxicity, bin, true, true, true, false),
        make("hax", "HX", "HateXplain", toxicity, bin, false, false, true, true),
        make("mmh", "MMHS", "MMHS150K", toxicity, bin, true, true, true, false),
        make("moc", "MC", "Mocheg", misinformation, tri, true, true, true, true),
        make("mrf", "MRF", "Misinfo Reaction Frames", misinformation, bin, false, false, true,
             false),
        make("pre", "Pre-V", "NELA-GT pre-vaccine", misinformation, bin, false, false, true, false,
             {.test = 1000}),
        make("pos", "Post-V", "NELA-GT post-vaccine", misinformation, bin, false, false, true,
             false, {.test = 1000}),
        make("ukr", "U-R", "NELA-GT Ukraine-Russia", misinformation, bin, false, false, true, false,
             {.test = 1000}),
        make("pst", "PS", "P-Stance", stance, bin, true, false, true, false),
        make("ph", "PH", "PubHealth", misinformation, tri, true, false, true, true),
        make("tox", "TX", "Toxigen", toxicity, bin, false, false, true, true),
        make("fv", "FV", "FEVER", misinformation, tri, true, false, false, true),
        make("vc", "VC", "VitaminC", misinformation, tri, true, false, false, true),
        make("ngt", "NGT", "NELA-GT 2022", misinformation, bin, false, false, false, true),
    };
  }();
  return kTable;
}

constexpr std::array<std::string_view, 12> kEvalKeys{"fak", "ham", "hax", "mmh", "moc", "mrf",
                                                     "pre", "pos", "ukr", "pst", "ph",  "tox"};

}  // namespace

std::span<const DatasetDescriptor> registry() { return table(); }

const DatasetDescriptor* find_descriptor(std::string_view key) noexcept {
  for (const auto& d : table())
    if (d.key == key) return &d;
  return nullptr;
}

const DatasetDescriptor& descriptor(std::string_view key) {
  if (const auto* d = find_descriptor(key)) return *d;
  throw UnknownDataset("unknown dataset key: " + std::string(key));
}

const DatasetDescriptor& descriptor_by_abbreviation(std::string_view abbrev) {
  for (const auto& d : table())
    if (d.abbreviation == abbrev) return d;
  throw UnknownDataset("unknown dataset abbreviation: " + std::string(abbrev));
}

std::span<const std::string_view> eval_set_keys() { return kEvalKeys; }

}  // namespace mmfc
