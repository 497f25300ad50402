#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mmfc/dataset.hpp"
#include "mmfc/registry.hpp"

namespace mmfc::mixture {

enum class Sampling { concat, per_epoch_uniform };

std::string_view sampling_name(Sampling s);
Sampling parse_sampling(std::string_view s);

/// A training recipe. Construct through make_spec so the name and label space
/// stay consistent with the members.
struct MixtureSpec {
  std::string name;                  // "FK + MC + VC"
  std::vector<std::string> members;  // dataset keys
  Sampling sampling = Sampling::concat;
  std::uint64_t seed = 0;
  LabelSpace label_space;
};

/// Throws InvalidConfig on an empty or duplicated member list, UnknownDataset
/// on unregistered keys.
MixtureSpec make_spec(std::vector<std::string> members, Sampling sampling = Sampling::concat,
                      std::uint64_t seed = 0);

/// Parses "moc,vc,fak".
std::vector<std::string> parse_member_list(std::string_view csv);

/// Abbreviations of the key-sorted members joined by " + ".
std::string canonical_name(std::vector<std::string> members);

/// Inverse of the table row naming: "FV + NGT + FK" -> {fak, fv, ngt}.
std::set<std::string> members_from_name(std::string_view name);

/// The examples of `split` drawn from every member. concat yields the
/// multiset union shuffled by (seed, epoch); per_epoch_uniform draws
/// sum-of-sizes examples, picking the member uniformly for each draw.
std::vector<VerificationExample> build(const MixtureSpec& spec, const DataStore& store, Split split,
                                       std::uint64_t epoch = 0);

/// Every size-k subset of `pool`, members alphabetized by key.
std::vector<MixtureSpec> enumerate_mixtures(std::size_t k, std::vector<std::string> pool);

}  // namespace mmfc::mixture
