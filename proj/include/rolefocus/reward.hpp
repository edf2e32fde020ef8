#pragma once

#include "rolefocus/text_metrics.hpp"
#include "rolefocus/trajectory.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rolefocus {

/// Per-sample ground truth for the focus and reference rewards.
struct GoldAnnotation {
    std::string character_id;
    FocusSet gold_foci;
    std::map<FocusDimension, std::string> gold_attrs;
    std::string reference_response;

    /// Throws std::invalid_argument if an attribute key is not a gold focus
    /// or the reference response is empty.
    void validate() const;
};

struct RewardVector {
    double focus = 0.0;
    double focus_attr = 0.0;
    double ref = 0.0;
    bool format_valid = false;

    friend bool operator==(const RewardVector&, const RewardVector&) = default;
};

enum class RefCombine { SumNormalized };

/// Overlap metrics averaged into the reference reward.
struct RefRewardConfig {
    std::vector<BleuConfig> metrics;
    RefCombine combine = RefCombine::SumNormalized;

    void validate() const;

    /// BLEU-1 plus the bigram-only BLEU score.
    static RefRewardConfig defaults() { return {{BleuConfig::unigram(), BleuConfig::individual(2)}, RefCombine::SumNormalized}; }
};

double score_focus(const ParsedTrajectory& parsed, const GoldAnnotation& gold);
double score_focus_attr(const ParsedTrajectory& parsed, const GoldAnnotation& gold);
double score_reference(const ParsedTrajectory& parsed, const GoldAnnotation& gold, const RefRewardConfig& cfg);

/// Scores an already-parsed trajectory; invalid formats yield the zero vector.
RewardVector score_parsed(const ParsedTrajectory& parsed, const GoldAnnotation& gold, const RefRewardConfig& cfg);

/// Parse + score. Throws InvalidUtf8 on malformed input.
RewardVector score_trajectory(std::string_view raw, const GoldAnnotation& gold, const RefRewardConfig& cfg);

}  // namespace rolefocus
