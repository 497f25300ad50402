#include "mmfc/mixture.hpp"

#include <algorithm>

#include "mmfc/error.hpp"
#include "mmfc/random.hpp"

namespace mmfc::mixture {

std::string_view sampling_name(Sampling s) {
  return s == Sampling::concat ? "concat" : "per_epoch_uniform";
}

Sampling parse_sampling(std::string_view s) {
  if (s == "concat") return Sampling::concat;
  if (s == "per_epoch_uniform") return Sampling::per_epoch_uniform;
  throw InvalidConfig("unknown sampling mode: " + std::string(s));
}

std::vector<std::string> parse_member_list(std::string_view csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto pos = csv.find(',', start);
    if (pos == std::string_view::npos) pos = csv.size();
    auto piece = csv.substr(start, pos - start);
    while (!piece.empty() && piece.front() == ' ') piece.remove_prefix(1);
    while (!piece.empty() && piece.back() == ' ') piece.remove_suffix(1);
    if (!piece.empty()) out.emplace_back(piece);
    start = pos + 1;
  }
  return out;
}

std::string canonical_name(std::vector<std::string> members) {
  std::sort(members.begin(), members.end());
  std::string name;
  for (const auto& m : members) {
    if (!name.empty()) name += " + ";
    name += descriptor(m).abbreviation;
  }
  return name;
}

std::set<std::string> members_from_name(std::string_view name) {
  std::set<std::string> keys;
  std::size_t start = 0;
  while (start <= name.size()) {
    auto pos = name.find('+', start);
    if (pos == std::string_view::npos) pos = name.size();
    auto piece = name.substr(start, pos - start);
    while (!piece.empty() && piece.front() == ' ') piece.remove_prefix(1);
    while (!piece.empty() && piece.back() == ' ') piece.remove_suffix(1);
    if (!piece.empty()) keys.insert(descriptor_by_abbreviation(piece).key);
    start = pos + 1;
  }
  return keys;
}

MixtureSpec make_spec(std::vector<std::string> members, Sampling sampling, std::uint64_t seed) {
  if (members.empty()) throw InvalidConfig("mixture needs at least one member");
  std::set<std::string> seen;
  LabelSpace space;
  for (const auto& m : members) {
    if (!seen.insert(m).second) throw InvalidConfig("duplicate mixture member: " + m);
    space = space | descriptor(m).label_space;
  }
  MixtureSpec spec;
  spec.name = canonical_name(members);
  spec.members = std::move(members);
  spec.sampling = sampling;
  spec.seed = seed;
  spec.label_space = space;
  return spec;
}

std::vector<VerificationExample> build(const MixtureSpec& spec, const DataStore& store, Split split,
                                       std::uint64_t epoch) {
  std::vector<std::vector<VerificationExample>> parts;
  parts.reserve(spec.members.size());
  for (const auto& key : spec.members) {
    auto part = store.at(key).split(split);
    if (part.empty())
      throw EmptySplit("dataset " + key + " has no " + std::string(split_name(split)) + " examples");
    parts.push_back(std::move(part));
  }

  std::vector<VerificationExample> out;
  if (spec.sampling == Sampling::concat) {
    for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
    Rng rng(derive_seed(spec.seed, "concat", split_name(split), epoch));
    rng.shuffle(std::span(out));
    return out;
  }

  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  Rng rng(derive_seed(spec.seed, "uniform", split_name(split), epoch));
  for (std::size_t i = 0; i < total; ++i) {
    const auto& p = parts[rng.below(parts.size())];
    out.push_back(p[rng.below(p.size())]);
  }
  return out;
}

std::vector<MixtureSpec> enumerate_mixtures(std::size_t k, std::vector<std::string> pool) {
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (k < 1 || k > pool.size())
    throw InvalidConfig("mixture size " + std::to_string(k) + " outside [1, " +
                        std::to_string(pool.size()) + "]");

  std::vector<MixtureSpec> out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::vector<std::string> members;
    for (auto i : idx) members.push_back(pool[i]);
    out.push_back(make_spec(std::move(members)));

    // advance to the next combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == pool.size() - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace mmfc::mixture
