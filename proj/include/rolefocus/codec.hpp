#pragma once

#include "rolefocus/grouping.hpp"
#include "rolefocus/normalizer.hpp"
#include "rolefocus/reward.hpp"
#include "rolefocus/trajectory.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

// JSON encodings shared by the CLI, the service and the fixture files.
namespace rolefocus::codec {

using json = nlohmann::ordered_json;

/// A document that parsed as JSON but violates the expected schema.
/// what() names the offending field path.
class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Typed field accessors; `path` prefixes error messages ("items[3].gold").
const json& require(const json& obj, const char* key, const std::string& path);
std::string require_string(const json& obj, const char* key, const std::string& path);
double require_number(const json& obj, const char* key, const std::string& path);

/// {"character_id"?, "gold_foci": [...], "gold_attrs": {label: text}, "reference_response"}
GoldAnnotation gold_from_json(const json& j, const std::string& path);
json to_json(const GoldAnnotation& gold);

json to_json(const RewardVector& r);
/// [focus, focus_attr, ref]
json to_json(const NormalizedRewards& r);

BleuConfig bleu_config_from_json(const json& j, const std::string& path);
json to_json(const BleuConfig& cfg);

/// {"character_id", "profile_text", "embedding"?}; a missing embedding is
/// filled by hash_embed(profile_text).
CharacterProfile profile_from_json(const json& j, const std::string& path);
json to_json(const CharacterProfile& p);

/// One profile per non-blank line.
std::vector<CharacterProfile> read_profiles_jsonl(const std::filesystem::path& path);

json to_json(const GroupModel& model);
GroupModel group_model_from_json(const json& j);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace rolefocus::codec
