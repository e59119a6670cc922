#pragma once

// JSON documents for models and rule bases. Doubles round-trip exactly.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "frr/classifier.hpp"
#include "frr/rules.hpp"

namespace frr {

inline constexpr int kFormatVersion = 1;

nlohmann::json config_to_json(const FrrConfig& config);
FrrConfig config_from_json(const nlohmann::json& doc);

nlohmann::json partitions_to_json(const PartitionSet& partitions);
PartitionSet partitions_from_json(const nlohmann::json& doc);

nlohmann::json model_to_json(const FrrModel& model);
FrrModel model_from_json(const nlohmann::json& doc);

nlohmann::json rules_to_json(const RuleBase& rb);
RuleBase rules_from_json(const nlohmann::json& doc);

/// Reads a JSON file; throws DataError when missing or malformed.
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

/// "model" or "rules", from the document's "kind" field.
std::string document_kind(const nlohmann::json& doc);

}  // namespace frr
