#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mmfc/registry.hpp"
#include "mmfc/schema.hpp"

namespace mmfc {

/// A normalized dataset, all splits.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string key, std::vector<VerificationExample> examples);

  const std::string& key() const { return key_; }
  const std::vector<VerificationExample>& examples() const { return examples_; }
  std::vector<VerificationExample> split(Split s) const;
  std::size_t size(Split s) const;
  LabelSpace label_space() const;

  /// Throws DuplicateId if an id repeats within or across splits, UnknownLabel
  /// if a label falls outside the registered label space.
  void validate() const;

 private:
  std::string key_;
  std::vector<VerificationExample> examples_;
};

/// Unified datasets keyed by dataset key, loaded from `<dir>/<key>.jsonl`.
class DataStore {
 public:
  void add(Dataset ds);
  bool contains(std::string_view key) const;
  const Dataset& at(std::string_view key) const;  // throws MissingDataset
  std::vector<std::string> keys() const;

  static DataStore load_dir(const std::filesystem::path& dir);
  static Dataset load_one(const std::filesystem::path& file, std::string key);

 private:
  std::map<std::string, Dataset, std::less<>> sets_;
};

}  // namespace mmfc
