#pragma once

#include "rolefocus/codec.hpp"
#include "rolefocus/grpo.hpp"
#include "rolefocus/normalizer.hpp"
#include "rolefocus/reward.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rolefocus {

struct ToyPrompt {
    std::string prompt_id;
    std::string character_id;
    GoldAnnotation gold;
    std::size_t group = 0;  // role group used for reward normalization
};

/// Bandit-scale stand-in for LLM sampling: every prompt owns a fixed pool
/// of candidate raw trajectories and the policy picks among them.
struct ToyTask {
    std::vector<ToyPrompt> prompts;
    std::vector<std::vector<std::string>> candidate_pool;  // parallel to prompts
    std::uint64_t seed = 0;

    std::size_t candidates_per_prompt() const { return candidate_pool.empty() ? 0 : candidate_pool.front().size(); }

    /// Equal-sized non-empty pools with at least one focus=1 and one
    /// focus=0 candidate each. Throws std::invalid_argument.
    void validate() const;
};

/// Twelve prompts over six characters, eight candidates each, role groups
/// fitted by k-means over hashed profile texts.
ToyTask default_toy_task(std::uint64_t seed = 7);

codec::json to_json(const ToyTask& task);
ToyTask toy_task_from_json(const codec::json& j);

struct TrainingRecord {
    int step = 0;
    double r_focus = 0.0;
    double r_attr = 0.0;
    double r_ref = 0.0;
    double r_scalar = 0.0;
    double objective = 0.0;
};

using TrainingLog = std::vector<TrainingRecord>;

struct ToyTrainingOptions {
    GrpoConfig grpo;
    WeightVector weights;
    RefRewardConfig ref = RefRewardConfig::defaults();
    int steps = 300;
    double lr = 0.5;
};

struct TrainingResult {
    TrainingLog log;
    ToyCategoricalPolicy policy;
    NormalizerState normalizer;
    // Policy-expected metrics before the first update.
    TrainingRecord initial;
};

/// GRPO on the candidate-pool policy.
///
/// Each step samples grpo_group_size candidates per prompt from the current
/// policy (which then serves as the behaviour policy), scores them, feeds the
/// raw rewards into `norm`, aggregates the normalized vector to a scalar,
/// standardizes within the group and takes one gradient-ascent step on the
/// clipped objective. The reference policy is the uniform initial policy.
///
/// Logged reward columns are expectations under the updated policy. The
/// scalar column normalizes with fixed statistics of the reference policy's
/// reward distribution per role group, so values across steps share one
/// scale. `objective` is the surrogate at the updated parameters on the
/// step's batch.
TrainingResult run_training(const ToyTask& task, const ToyTrainingOptions& opts, NormalizerState norm);

/// CSV: step,r_focus,r_attr,r_ref,r_scalar,objective with 6 significant digits.
std::string curves_csv(const TrainingLog& log);
void emit_curves(const TrainingLog& log, const std::filesystem::path& path);

}  // namespace rolefocus
