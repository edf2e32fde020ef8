#include "rolefocus/normalizer.hpp"

#include "json.hpp"

#include <cmath>

namespace rolefocus {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(RewardType k) noexcept {
    switch (k) {
        case RewardType::Focus: return "focus";
        case RewardType::FocusAttr: return "focus_attr";
        case RewardType::Ref: return "ref";
    }
    return "?";
}

std::optional<RewardType> parse_reward_type(std::string_view s) noexcept {
    for (auto k : kRewardTypes) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

double component(const RewardVector& r, RewardType k) noexcept {
    switch (k) {
        case RewardType::Focus: return r.focus;
        case RewardType::FocusAttr: return r.focus_attr;
        case RewardType::Ref: return r.ref;
    }
    return 0.0;
}

void WeightVector::validate() const {
    for (double w : {focus, attr, ref}) {
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("reward weights must be finite and >= 0");
    }
}

NormalizerState::NormalizerState(double decay, double epsilon, std::optional<std::size_t> group_count)
    : decay_(decay), epsilon_(epsilon), group_count_(group_count) {
    if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("decay must lie in (0, 1)");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite and > 0");
}

void NormalizerState::check_group(std::size_t group) const {
    if (group_count_ && group >= *group_count_) throw UnknownGroup(group);
}

RunningStat NormalizerState::stat(std::size_t group, RewardType k) const {
    const auto it = stats_.find({group, k});
    return it == stats_.end() ? RunningStat{} : it->second;
}

void NormalizerState::update(std::size_t group, const RewardVector& rewards) {
    check_group(group);
    for (auto k : kRewardTypes) stats_[{group, k}].update(component(rewards, k), decay_);
}

NormalizedRewards NormalizerState::normalize(std::size_t group, const RewardVector& rewards) const {
    check_group(group);
    auto standardize = [&](RewardType k) {
        const RunningStat s = stat(group, k);
        return (component(rewards, k) - s.mean) / std::sqrt(s.var + epsilon_);
    };
    return {standardize(RewardType::Focus), standardize(RewardType::FocusAttr), standardize(RewardType::Ref),
            rewards.format_valid};
}

void NormalizerState::set_stat(std::size_t group, RewardType k, const RunningStat& s) {
    check_group(group);
    if (!(s.var >= 0.0) || !std::isfinite(s.var) || !std::isfinite(s.mean)) {
        throw std::invalid_argument("stat mean/var must be finite with var >= 0");
    }
    stats_[{group, k}] = s;
}

NormalizerState update(NormalizerState state, std::size_t group, const RewardVector& rewards) {
    state.update(group, rewards);
    return state;
}

NormalizedRewards normalize(const NormalizerState& state, std::size_t group, const RewardVector& rewards) {
    return state.normalize(group, rewards);
}

double aggregate(const NormalizedRewards& r, const WeightVector& w) noexcept {
    return w.focus * r.focus + w.attr * r.focus_attr + w.ref * r.ref;
}

std::string snapshot(const NormalizerState& state) {
    ordered_json doc;
    doc["version"] = kSnapshotVersion;
    doc["epsilon"] = state.epsilon();
    doc["decay"] = state.decay();
    doc["stats"] = ordered_json::array();
    for (const auto& [key, s] : state.stats()) {
        ordered_json entry;
        entry["group"] = key.first;
        entry["reward"] = to_string(key.second);
        entry["mean"] = s.mean;
        entry["var"] = s.var;
        entry["count"] = s.count;
        doc["stats"].push_back(std::move(entry));
    }
    return doc.dump();
}

NormalizerState restore(std::string_view document, std::optional<std::size_t> group_count) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const ordered_json::parse_error& e) {
        throw SnapshotError(std::string("snapshot is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SnapshotError("snapshot must be a JSON object");
    if (!doc.contains("version") || !doc["version"].is_number_integer()) {
        throw SnapshotError("snapshot.version missing or not an integer");
    }
    if (const auto v = doc["version"].get<std::int64_t>(); v != kSnapshotVersion) {
        throw VersionError("unsupported snapshot version " + std::to_string(v));
    }

    auto number = [](const ordered_json& obj, const char* key, const std::string& where) {
        if (!obj.contains(key) || !obj[key].is_number()) throw SnapshotError(where + "." + key + " missing or not a number");
        return obj[key].get<double>();
    };

    const double epsilon = number(doc, "epsilon", "snapshot");
    const double decay = number(doc, "decay", "snapshot");
    if (!doc.contains("stats") || !doc["stats"].is_array()) throw SnapshotError("snapshot.stats missing or not an array");

    std::optional<NormalizerState> state;
    try {
        state.emplace(decay, epsilon, group_count);
    } catch (const std::invalid_argument& e) {
        throw SnapshotError(e.what());
    }

    std::size_t index = 0;
    for (const auto& entry : doc["stats"]) {
        const std::string where = "snapshot.stats[" + std::to_string(index++) + "]";
        if (!entry.is_object()) throw SnapshotError(where + " must be an object");
        if (!entry.contains("group") || !entry["group"].is_number_unsigned()) {
            throw SnapshotError(where + ".group missing or not a non-negative integer");
        }
        if (!entry.contains("reward") || !entry["reward"].is_string()) throw SnapshotError(where + ".reward missing");
        const auto k = parse_reward_type(entry["reward"].get<std::string>());
        if (!k) throw SnapshotError(where + ".reward must be focus, focus_attr or ref");
        if (!entry.contains("count") || !entry["count"].is_number_unsigned()) {
            throw SnapshotError(where + ".count missing or not a non-negative integer");
        }

        const auto group = entry["group"].get<std::size_t>();
        RunningStat s{number(entry, "mean", where), number(entry, "var", where), entry["count"].get<std::uint64_t>()};
        if (state->stats().contains({group, *k})) throw SnapshotError(where + " duplicates an earlier entry");
        try {
            state->set_stat(group, *k, s);
        } catch (const std::exception& e) {
            throw SnapshotError(where + ": " + e.what());
        }
    }
    return std::move(*state);
}

}  // namespace rolefocus
