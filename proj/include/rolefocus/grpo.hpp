#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rolefocus {

class GrpoError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Per-token log-probabilities of one sampled response under the current,
/// behaviour and reference policies.
struct ResponseLogProbs {
    std::vector<double> logp_new;
    std::vector<double> logp_old;
    std::vector<double> logp_ref;

    /// Equal non-zero lengths, finite values <= 0.
    void validate() const;
};

enum class KlEstimator {
    K3,     // exp(ref - new) - (ref - new) - 1, non-negative
    Naive,  // new - ref
};

struct GrpoConfig {
    double clip_epsilon = 0.2;
    double kl_beta = 0.02;
    double adv_epsilon = 1e-4;
    std::size_t grpo_group_size = 4;
    KlEstimator kl_estimator = KlEstimator::K3;

    void validate() const;
};

/// (R_i - mean) / (population std + adv_epsilon). Needs at least two rewards.
std::vector<double> group_advantages(std::span<const double> rewards, double adv_epsilon);

/// exp(logp_new - logp_old) per token.
std::vector<double> token_ratios(const ResponseLogProbs& lp);

std::vector<double> kl_estimate(const ResponseLogProbs& lp, KlEstimator estimator = KlEstimator::K3);

/// Clipped surrogate with per-token KL penalty, averaged over tokens then
/// responses. Each response's advantage is shared by all of its tokens.
double grpo_objective(std::span<const ResponseLogProbs> group, std::span<const double> advantages, const GrpoConfig& cfg);

/// Softmax policy over a fixed candidate list per prompt.
class ToyCategoricalPolicy {
public:
    ToyCategoricalPolicy() = default;
    explicit ToyCategoricalPolicy(std::vector<std::vector<double>> logits) : logits_(std::move(logits)) {}
    static ToyCategoricalPolicy uniform(std::size_t prompts, std::size_t candidates);

    std::size_t prompt_count() const noexcept { return logits_.size(); }
    std::vector<double>& logits(std::size_t prompt) { return logits_.at(prompt); }
    const std::vector<double>& logits(std::size_t prompt) const { return logits_.at(prompt); }
    const std::vector<std::vector<double>>& all_logits() const noexcept { return logits_; }

    std::vector<double> log_probs(std::size_t prompt) const;
    std::vector<double> probs(std::size_t prompt) const;

    friend bool operator==(const ToyCategoricalPolicy&, const ToyCategoricalPolicy&) = default;

private:
    std::vector<std::vector<double>> logits_;
};

/// One prompt's sampled group: each candidate is a single-"token" response.
struct ToyPromptGroup {
    std::size_t prompt = 0;
    std::vector<std::size_t> actions;
    std::vector<double> advantages;
    std::vector<double> logp_old;
    std::vector<double> logp_ref;
};

using ToyBatch = std::vector<ToyPromptGroup>;

/// Mean over groups of grpo_objective evaluated at the policy's log-probs.
double toy_objective(const ToyCategoricalPolicy& policy, const ToyBatch& batch, const GrpoConfig& cfg);

/// Analytic gradient of toy_objective with respect to every logit.
std::vector<std::vector<double>> toy_gradient(const ToyCategoricalPolicy& policy, const ToyBatch& batch,
                                              const GrpoConfig& cfg);

/// Max |analytic - central difference| over all logits.
double grpo_gradient_check(const ToyCategoricalPolicy& policy, const ToyBatch& batch, const GrpoConfig& cfg,
                           double step = 1e-5);

}  // namespace rolefocus
