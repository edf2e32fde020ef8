#pragma once

#include "rolefocus/codec.hpp"
#include "rolefocus/grouping.hpp"
#include "rolefocus/normalizer.hpp"
#include "rolefocus/reward.hpp"

#include <string>
#include <vector>

namespace rolefocus {

struct PipelineConfig {
    WeightVector weights;
    RefRewardConfig ref = RefRewardConfig::defaults();
    // When set, format-invalid items neither update statistics nor carry a
    // normalized signal (their normalized vector is forced to zero).
    bool gate_after_normalize = false;

    void validate() const {
        weights.validate();
        ref.validate();
    }
};

/// One trajectory to score: a service request item or a corpus line.
struct ScoreItem {
    std::string request_id;
    std::string character_id;
    std::string raw_output;
    GoldAnnotation gold;
};

struct ItemDiagnostic {
    std::string code;
    Severity severity = Severity::Warning;
    std::string detail;
};

struct ScoredItem {
    std::string request_id;
    std::size_t group = 0;
    RewardVector raw;
    NormalizedRewards normalized;
    double scalar = 0.0;
    std::vector<ItemDiagnostic> diagnostics;
};

/// Group for a character: its fitted assignment, else the nearest centroid
/// to hash_embed(character_id). The fallback is reported in `diagnostics`.
std::size_t resolve_group(const GroupModel& model, const std::string& character_id,
                          std::vector<ItemDiagnostic>& diagnostics);

/// parse -> score -> (update) -> normalize -> aggregate. With `update`, the
/// item's rewards enter the statistics before it is normalized.
ScoredItem score_item(const ScoreItem& item, const GroupModel& model, NormalizerState& state, const PipelineConfig& cfg,
                      bool update);

/// {"character_id", "raw_output", "gold", "request_id"?}. A missing
/// request_id becomes `fallback_id`.
ScoreItem score_item_from_json(const codec::json& j, const std::string& path, const std::string& fallback_id);

codec::json to_json(const ScoredItem& item);

}  // namespace rolefocus
