#include "rolefocus/pipeline.hpp"

namespace rolefocus {

std::size_t resolve_group(const GroupModel& model, const std::string& character_id,
                          std::vector<ItemDiagnostic>& diagnostics) {
    if (const auto g = model.group_of(character_id)) return *g;

    const Embedding e = hash_embed(character_id);
    if (e.size() != model.dimension()) {
        diagnostics.push_back({"FallbackDimensionMismatch", Severity::Warning, character_id});
        return 0;
    }
    diagnostics.push_back({"FallbackEmbedding", Severity::Warning, character_id});
    return assign_group(model, e);
}

ScoredItem score_item(const ScoreItem& item, const GroupModel& model, NormalizerState& state, const PipelineConfig& cfg,
                      bool update) {
    ScoredItem out;
    out.request_id = item.request_id;

    const ParsedTrajectory parsed = parse_trajectory(item.raw_output);
    for (const auto& d : parsed.diagnostics) out.diagnostics.push_back({std::string(to_string(d.code)), d.severity, d.detail});

    out.raw = score_parsed(parsed, item.gold, cfg.ref);
    out.group = resolve_group(model, item.character_id, out.diagnostics);

    const bool gated_out = cfg.gate_after_normalize && !out.raw.format_valid;
    if (update && !gated_out) state.update(out.group, out.raw);
    out.normalized = gated_out ? NormalizedRewards{} : state.normalize(out.group, out.raw);
    out.scalar = aggregate(out.normalized, cfg.weights);
    return out;
}

ScoreItem score_item_from_json(const codec::json& j, const std::string& path, const std::string& fallback_id) {
    ScoreItem item;
    item.request_id = j.contains("request_id") ? codec::require_string(j, "request_id", path) : fallback_id;
    item.character_id = codec::require_string(j, "character_id", path);
    item.raw_output = codec::require_string(j, "raw_output", path);
    item.gold = codec::gold_from_json(codec::require(j, "gold", path), path + ".gold");
    if (item.gold.character_id.empty()) item.gold.character_id = item.character_id;
    return item;
}

codec::json to_json(const ScoredItem& item) {
    codec::json j;
    j["request_id"] = item.request_id;
    j["group"] = item.group;
    j["raw"] = codec::to_json(item.raw);
    j["normalized"] = codec::to_json(item.normalized);
    j["scalar"] = item.scalar;
    j["diagnostics"] = codec::json::array();
    for (const auto& d : item.diagnostics) {
        codec::json dj;
        dj["code"] = d.code;
        dj["severity"] = to_string(d.severity);
        dj["detail"] = d.detail;
        j["diagnostics"].push_back(std::move(dj));
    }
    return j;
}

}  // namespace rolefocus
