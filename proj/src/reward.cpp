#include "rolefocus/reward.hpp"

#include <stdexcept>

namespace rolefocus {

void GoldAnnotation::validate() const {
    for (const auto& [dim, attr] : gold_attrs) {
        if (!gold_foci.contains(dim)) {
            throw std::invalid_argument("gold attribute for " + std::string(to_string(dim)) + " has no gold focus");
        }
    }
    if (reference_response.empty()) throw std::invalid_argument("reference_response must be non-empty");
}

void RefRewardConfig::validate() const {
    if (metrics.empty()) throw std::invalid_argument("reference reward needs at least one metric");
    for (const auto& m : metrics) m.validate();
}

double score_focus(const ParsedTrajectory& parsed, const GoldAnnotation& gold) {
    if (!parsed.format_valid) return 0.0;
    FocusSet predicted;
    for (const auto& f : parsed.foci) predicted.insert(f.dimension);
    return exact_match(predicted, gold.gold_foci);
}

double score_focus_attr(const ParsedTrajectory& parsed, const GoldAnnotation& gold) {
    if (!parsed.format_valid || gold.gold_attrs.empty()) return 0.0;

    double total = 0.0;
    for (const auto& [dim, gold_attr] : gold.gold_attrs) {
        std::string predicted;
        bool declared = false;
        for (const auto& f : parsed.foci) {
            if (f.dimension != dim) continue;
            if (declared) predicted.push_back(' ');
            predicted += f.attribute;
            declared = true;
        }
        if (declared) total += bleu1(tokenize(predicted), tokenize(gold_attr));
    }
    return total / static_cast<double>(gold.gold_attrs.size());
}

double score_reference(const ParsedTrajectory& parsed, const GoldAnnotation& gold, const RefRewardConfig& cfg) {
    cfg.validate();
    if (!parsed.format_valid) return 0.0;
    const TokenSequence answer = tokenize(parsed.answer);
    const TokenSequence reference = tokenize(gold.reference_response);
    double sum = 0.0;
    for (const auto& m : cfg.metrics) sum += bleu(answer, reference, m);
    return sum / static_cast<double>(cfg.metrics.size());
}

RewardVector score_parsed(const ParsedTrajectory& parsed, const GoldAnnotation& gold, const RefRewardConfig& cfg) {
    if (!parsed.format_valid) return {};
    return {score_focus(parsed, gold), score_focus_attr(parsed, gold), score_reference(parsed, gold, cfg), true};
}

RewardVector score_trajectory(std::string_view raw, const GoldAnnotation& gold, const RefRewardConfig& cfg) {
    return score_parsed(parse_trajectory(raw), gold, cfg);
}

}  // namespace rolefocus
