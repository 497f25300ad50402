#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfc/schema.hpp"

namespace mmfc {

// Unified JSONL schema. Keys, in emission order:
//   id, claim, evidence [{kind, content, silver}], label, dataset, domain,
//   split, timestamp (ISO date or null)

nlohmann::ordered_json to_json(const VerificationExample& ex);
VerificationExample from_json(const nlohmann::json& j, bool strict = true);

/// One line, no trailing newline.
std::string serialize(const VerificationExample& ex);

/// Throws SchemaViolation on malformed input. In strict mode unknown keys are
/// rejected as well.
VerificationExample parse(std::string_view line, bool strict = true);

std::vector<VerificationExample> read_jsonl(const std::filesystem::path& path, bool strict = true);
void write_jsonl(const std::filesystem::path& path, const std::vector<VerificationExample>& examples);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace mmfc
