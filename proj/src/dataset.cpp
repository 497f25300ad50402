#include "mmfc/dataset.hpp"

#include <algorithm>
#include <unordered_map>

#include "mmfc/error.hpp"
#include "mmfc/jsonl.hpp"

namespace mmfc {

Dataset::Dataset(std::string key, std::vector<VerificationExample> examples)
    : key_(std::move(key)), examples_(std::move(examples)) {}

std::vector<VerificationExample> Dataset::split(Split s) const {
  std::vector<VerificationExample> out;
  for (const auto& ex : examples_)
    if (ex.split == s) out.push_back(ex);
  return out;
}

std::size_t Dataset::size(Split s) const {
  std::size_t n = 0;
  for (const auto& ex : examples_) n += ex.split == s;
  return n;
}

LabelSpace Dataset::label_space() const {
  if (const auto* d = find_descriptor(key_)) return d->label_space;
  LabelSpace space;
  for (const auto& ex : examples_) space.insert(ex.label);
  return space;
}

void Dataset::validate() const {
  const LabelSpace space = label_space();
  std::unordered_map<std::string_view, Split> seen;
  seen.reserve(examples_.size());
  for (const auto& ex : examples_) {
    if (ex.id.empty()) throw SchemaViolation(key_ + ": empty id");
    auto [it, inserted] = seen.emplace(ex.id, ex.split);
    if (!inserted) {
      throw DuplicateId(key_ + ": id \"" + ex.id + "\" appears in " +
                        std::string(split_name(it->second)) + " and " +
                        std::string(split_name(ex.split)));
    }
    if (!space.contains(ex.label))
      throw UnknownLabel(key_ + "/" + ex.id + ": label " + std::to_string(code(ex.label)) +
                         " outside label space " + space.to_string());
  }
}

void DataStore::add(Dataset ds) {
  auto key = ds.key();
  sets_.insert_or_assign(std::move(key), std::move(ds));
}

bool DataStore::contains(std::string_view key) const { return sets_.find(key) != sets_.end(); }

const Dataset& DataStore::at(std::string_view key) const {
  auto it = sets_.find(key);
  if (it == sets_.end()) throw MissingDataset("dataset not loaded: " + std::string(key));
  return it->second;
}

std::vector<std::string> DataStore::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : sets_) out.push_back(k);
  return out;
}

Dataset DataStore::load_one(const std::filesystem::path& file, std::string key) {
  Dataset ds(std::move(key), read_jsonl(file));
  ds.validate();
  return ds;
}

DataStore DataStore::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw MissingDataset("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  DataStore store;
  for (const auto& f : files) store.add(load_one(f, f.stem().string()));
  return store;
}

}  // namespace mmfc
