#pragma once

// Shared fixtures and independent oracles for the test suites.

#include "rolefocus/codec.hpp"
#include "rolefocus/grouping.hpp"
#include "rolefocus/random.hpp"
#include "rolefocus/reward.hpp"
#include "rolefocus/text_metrics.hpp"
#include "rolefocus/toy_trainer.hpp"
#include "rolefocus/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

namespace testsupport {

using namespace rolefocus;

// ---- BLEU by direct counting -------------------------------------------------

inline std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& toks, int n) {
    std::unordered_map<std::string, int> counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= toks.size(); ++i) {
        std::string key;
        for (int k = 0; k < n; ++k) {
            key += toks[i + k];
            key += '\x1f';
        }
        ++counts[key];
    }
    return counts;
}

inline double oracle_bleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref, int max_n,
                          std::vector<double> weights, bool add_epsilon = false) {
    if (cand.empty()) return 0.0;
    const int n_eff = std::min<int>(max_n, static_cast<int>(cand.size()));
    weights.resize(n_eff);
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (double& w : weights) w = wsum > 0.0 ? w / wsum : 1.0 / n_eff;

    double product = 1.0;
    for (int n = 1; n <= n_eff; ++n) {
        if (weights[n - 1] == 0.0) continue;
        const auto c = ngram_counts(cand, n);
        const auto r = ngram_counts(ref, n);
        int clipped = 0, total = 0;
        for (const auto& [g, k] : c) {
            total += k;
            auto it = r.find(g);
            clipped += std::min(k, it == r.end() ? 0 : it->second);
        }
        double p = static_cast<double>(clipped) / total;
        if (clipped == 0) {
            if (!add_epsilon) return 0.0;
            p = kSmoothingEpsilon / total;
        }
        product *= std::pow(p, weights[n - 1]);
    }
    const double c = static_cast<double>(cand.size()), rl = static_cast<double>(ref.size());
    const double bp = c >= rl ? 1.0 : std::exp(1.0 - rl / c);
    return bp * product;
}

inline std::vector<std::string> random_tokens(Rng& rng, std::size_t max_len, std::size_t alphabet) {
    std::vector<std::string> out(rng.below(max_len + 1));
    for (auto& t : out) t = "w" + std::to_string(rng.below(alphabet));
    return out;
}

// ---- clustering ---------------------------------------------------------------

inline double gaussian(Rng& rng) {
    double u1 = rng.uniform();
    while (u1 <= 0.0) u1 = rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct Blobs {
    std::vector<CharacterProfile> profiles;
    std::vector<int> labels;
};

/// Three isotropic blobs (sigma 0.05) in 4-D with pairwise center distance >= 5.
inline Blobs three_blobs(std::uint64_t seed, int per_blob = 30) {
    const std::vector<std::vector<double>> centers = {{0, 0, 0, 0}, {6, 0, 0, 0}, {0, 6, 3, 0}};
    Rng rng(seed);
    Blobs b;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < per_blob; ++i) {
            CharacterProfile p;
            p.character_id = "blob" + std::to_string(c) + "_" + std::to_string(i);
            for (double x : centers[c]) p.embedding.push_back(x + 0.05 * gaussian(rng));
            b.profiles.push_back(std::move(p));
            b.labels.push_back(c);
        }
    }
    return b;
}

/// Adjusted Rand index from the contingency table.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    double index = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : joint) index += c2(v);
    for (const auto& [k, v] : ra) sa += c2(v);
    for (const auto& [k, v] : rb) sb += c2(v);
    const double expected = sa * sb / c2(static_cast<double>(a.size()));
    const double max_index = (sa + sb) / 2;
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

// ---- trajectories ---------------------------------------------------------------

inline const char* kWords[] = {"the", "cake", "remembers", "a", "quiet", "harbor", "storm", "ledger", "warm",
                               "signal", "bright", "old", "friend", "river", "lamp", "dust", "north", "ember"};

inline std::string random_phrase(Rng& rng, std::size_t min_words, std::size_t max_words) {
    const std::size_t n = min_words + rng.below(max_words - min_words + 1);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += kWords[rng.below(std::size(kWords))];
    }
    return s;
}

/// A format-valid trajectory with random prose, foci at word boundaries and a
/// non-empty answer that may contain balanced braces.
inline ParsedTrajectory random_trajectory(Rng& rng) {
    ParsedTrajectory t;
    t.think_text = random_phrase(rng, 0, 12);
    const std::size_t n_foci = rng.below(5);
    std::vector<std::size_t> cuts;
    for (std::size_t i = 0; i < n_foci; ++i) cuts.push_back(rng.below(t.think_text.size() + 1));
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t pos : cuts) {
        FocusDeclaration d{kAllFocusDimensions[rng.below(kAllFocusDimensions.size())], random_phrase(rng, 0, 4), pos};
        t.foci.push_back(d);
    }
    t.answer = random_phrase(rng, 1, 8);
    if (rng.below(3) == 0) t.answer = "{" + t.answer + "} " + kWords[rng.below(std::size(kWords))];
    t.answer_was_boxed = true;
    t.format_valid = true;
    return t;
}

// ---- long-form role-play transcripts --------------------------------------------

// Character-R1 output for Xiaoming (case 2): six foci, no boxed answer.
inline const std::string kXiaomingOutput =
    "<think>\n"
    "<focus>Emotion</focus><focus_attr>Unwilling to explain</focus_attr><focus>Engagement</focus>"
    "<focus_attr>Encourage user to continue</focus_attr><focus>Style</focus><focus_attr>Direct and honest</focus_attr>"
    "<focus>Memory</focus><focus_attr>User's question about time</focus_attr><focus>Human_Like</focus>"
    "<focus_attr>Natural conversation\n"
    "</focus_attr><focus>Empathetic</focus><focus_attr>Understanding and supportive</focus_attr>\n"
    "</think>\n"
    "\n"
    "I have to take care of my business, it's not that flexible.";

inline const std::string kXiaomingReference =
    "Freedom comes at a price. I have to take care of my business and my family... there's never enough time.";

// Character-R1 output for Cake: one Knowledge focus, no boxed answer.
inline const std::string kCakeOutput =
    "<think>I need to describe my original form. \n"
    "<focus>Knowledge</focus>\n"
    "<focus_attr>Original form</focus_attr>\n"
    "</think>\n"
    "I was originally a fresh cream fruit cake, freshly baked and most delicious. Back then, I had a pure heart and "
    "the purest joy.";

inline const std::string kCakeReference =
    "I used to be a normal, fresh cream fruit cake, very delicious and much loved. At that time, I was filled with "
    "love and longing for the world. I had my own dreams and hopes. Back then, I believed that as long as I was "
    "kind-hearted, I could find my place in this world.";

inline GoldAnnotation cake_gold() {
    GoldAnnotation g;
    g.character_id = "cake";
    g.gold_foci = {FocusDimension::Knowledge};
    g.gold_attrs = {{FocusDimension::Knowledge, "Original form"}};
    g.reference_response = kCakeReference;
    return g;
}

inline GoldAnnotation xiaoming_gold() {
    GoldAnnotation g;
    g.character_id = "xiaoming";
    g.gold_foci = {FocusDimension::Emotion, FocusDimension::Engagement, FocusDimension::Style,
                   FocusDimension::Memory,  FocusDimension::HumanLike,  FocusDimension::Empathetic};
    g.gold_attrs = {{FocusDimension::Emotion, "Unwilling to explain"},
                    {FocusDimension::Style, "Direct and honest"}};
    g.reference_response = kXiaomingReference;
    return g;
}

// ---- scoring corpus ---------------------------------------------------------------

/// `n` score items cycled from the default toy task, with a few characters
/// the group model has never seen.
inline codec::json corpus_items(std::size_t n) {
    const ToyTask task = default_toy_task();
    codec::json items = codec::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = i % task.prompts.size();
        const std::size_t m = (i / task.prompts.size() + i) % task.candidates_per_prompt();
        codec::json item;
        item["request_id"] = "r" + std::to_string(i);
        item["character_id"] = i % 17 == 5 ? "stranger" + std::to_string(i) : task.prompts[p].character_id;
        item["raw_output"] = task.candidate_pool[p][m];
        item["gold"] = codec::to_json(task.prompts[p].gold);
        items.push_back(item);
    }
    return items;
}

/// Group model over the toy task's characters (hash-embedded ids).
inline GroupModel corpus_model(std::size_t clusters = 3) {
    const ToyTask task = default_toy_task();
    std::vector<CharacterProfile> profiles;
    for (const auto& p : task.prompts) {
        bool seen = false;
        for (const auto& q : profiles) seen |= q.character_id == p.character_id;
        if (!seen) profiles.push_back({p.character_id, p.character_id, hash_embed(p.character_id)});
    }
    return fit_kmeans(profiles, clusters, 0);
}

}  // namespace testsupport
