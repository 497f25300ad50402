#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfc/schema.hpp"

namespace mmfc {

/// Version of the native-label mapping tables. Bump whenever any table changes.
inline constexpr std::string_view kLabelMapVersion = "1";

enum class NativeFormat { tsv, jsonl };

struct NormalizeOptions {
  bool strict_images = false;           // require image refs to resolve
  std::filesystem::path image_root;     // base for relative image paths
  std::optional<Split> split;           // used when the record has no split column
};

/// Column contract and label table of one dataset adapter.
struct AdapterInfo {
  std::string key;
  NativeFormat format = NativeFormat::tsv;
  std::vector<std::string> required_fields;
  std::string label_field;
  // Native label (lower-cased) -> unified code.
  std::map<std::string, VeracityLabel> label_table;
};

const AdapterInfo& adapter_info(std::string_view key);  // throws UnknownDataset
std::vector<std::string> adapter_keys();

/// Maps one dataset-native record onto the unified schema. TSV rows are passed
/// as a JSON object of strings keyed by header name. Adapter "unified" accepts
/// records already in the unified schema and returns them unchanged.
VerificationExample normalize(const nlohmann::json& raw, std::string_view adapter,
                              const NormalizeOptions& opts = {});

/// Reads a native file (TSV with header row, or JSONL) into raw records.
std::vector<nlohmann::json> read_native(const std::filesystem::path& path, NativeFormat format);

/// Normalizes every record of a native file.
std::vector<VerificationExample> normalize_file(const std::filesystem::path& path,
                                                std::string_view adapter,
                                                const NormalizeOptions& opts = {});

}  // namespace mmfc
