#include "rolefocus/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rolefocus {

void ResponseLogProbs::validate() const {
    if (logp_new.empty()) throw GrpoError("response must have at least one token");
    if (logp_old.size() != logp_new.size() || logp_ref.size() != logp_new.size()) {
        throw GrpoError("log-prob arrays must share one length");
    }
    for (const auto* arr : {&logp_new, &logp_old, &logp_ref}) {
        for (double v : *arr) {
            if (!std::isfinite(v) || v > 0.0) throw GrpoError("log-probs must be finite and <= 0");
        }
    }
}

void GrpoConfig::validate() const {
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw GrpoError("clip_epsilon must lie in (0, 1)");
    if (!(kl_beta >= 0.0) || !std::isfinite(kl_beta)) throw GrpoError("kl_beta must be finite and >= 0");
    if (!(adv_epsilon > 0.0) || !std::isfinite(adv_epsilon)) throw GrpoError("adv_epsilon must be finite and > 0");
    if (grpo_group_size < 2) throw GrpoError("grpo_group_size must be >= 2");
}

std::vector<double> group_advantages(std::span<const double> rewards, double adv_epsilon) {
    if (rewards.size() < 2) throw GrpoError("group advantages need at least two rewards");
    if (!(adv_epsilon > 0.0) || !std::isfinite(adv_epsilon)) throw GrpoError("adv_epsilon must be positive");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double denom = std::sqrt(var / n) + adv_epsilon;

    std::vector<double> adv;
    adv.reserve(rewards.size());
    for (double r : rewards) adv.push_back((r - mean) / denom);
    return adv;
}

std::vector<double> token_ratios(const ResponseLogProbs& lp) {
    lp.validate();
    std::vector<double> out(lp.logp_new.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = std::exp(lp.logp_new[t] - lp.logp_old[t]);
    return out;
}

std::vector<double> kl_estimate(const ResponseLogProbs& lp, KlEstimator estimator) {
    lp.validate();
    std::vector<double> out(lp.logp_new.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const double log_u = lp.logp_ref[t] - lp.logp_new[t];
        out[t] = estimator == KlEstimator::K3 ? std::exp(log_u) - log_u - 1.0 : -log_u;
    }
    return out;
}

double grpo_objective(std::span<const ResponseLogProbs> group, std::span<const double> advantages, const GrpoConfig& cfg) {
    cfg.validate();
    if (group.empty() || group.size() != advantages.size()) {
        throw GrpoError("group and advantages must be non-empty and equally sized");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < group.size(); ++i) {
        const auto ratios = token_ratios(group[i]);
        const auto kl = kl_estimate(group[i], cfg.kl_estimator);
        const double a = advantages[i];
        double sum = 0.0;
        for (std::size_t t = 0; t < ratios.size(); ++t) {
            const double clipped = std::clamp(ratios[t], 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
            sum += std::min(ratios[t] * a, clipped * a) - cfg.kl_beta * kl[t];
        }
        total += sum / static_cast<double>(ratios.size());
    }
    return total / static_cast<double>(group.size());
}

ToyCategoricalPolicy ToyCategoricalPolicy::uniform(std::size_t prompts, std::size_t candidates) {
    return ToyCategoricalPolicy(std::vector<std::vector<double>>(prompts, std::vector<double>(candidates, 0.0)));
}

std::vector<double> ToyCategoricalPolicy::log_probs(std::size_t prompt) const {
    const auto& z = logits(prompt);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = std::min(0.0, z[j] - lse);
    return out;
}

std::vector<double> ToyCategoricalPolicy::probs(std::size_t prompt) const {
    auto lp = log_probs(prompt);
    for (double& v : lp) v = std::exp(v);
    return lp;
}

namespace {

void check_group(const ToyCategoricalPolicy& policy, const ToyPromptGroup& g) {
    if (g.prompt >= policy.prompt_count()) throw GrpoError("batch refers to an unknown prompt");
    const std::size_t n = g.actions.size();
    if (n == 0 || g.advantages.size() != n || g.logp_old.size() != n || g.logp_ref.size() != n) {
        throw GrpoError("toy group arrays must be non-empty and equally sized");
    }
    for (auto a : g.actions) {
        if (a >= policy.logits(g.prompt).size()) throw GrpoError("toy action out of range");
    }
}

}  // namespace

double toy_objective(const ToyCategoricalPolicy& policy, const ToyBatch& batch, const GrpoConfig& cfg) {
    if (batch.empty()) throw GrpoError("empty toy batch");
    double total = 0.0;
    for (const auto& g : batch) {
        check_group(policy, g);
        const auto lp = policy.log_probs(g.prompt);
        std::vector<ResponseLogProbs> responses;
        responses.reserve(g.actions.size());
        for (std::size_t i = 0; i < g.actions.size(); ++i) {
            responses.push_back({{lp[g.actions[i]]}, {g.logp_old[i]}, {g.logp_ref[i]}});
        }
        total += grpo_objective(responses, g.advantages, cfg);
    }
    return total / static_cast<double>(batch.size());
}

std::vector<std::vector<double>> toy_gradient(const ToyCategoricalPolicy& policy, const ToyBatch& batch,
                                              const GrpoConfig& cfg) {
    cfg.validate();
    if (batch.empty()) throw GrpoError("empty toy batch");
    std::vector<std::vector<double>> grad;
    grad.reserve(policy.prompt_count());
    for (const auto& z : policy.all_logits()) grad.emplace_back(z.size(), 0.0);

    const double batch_scale = 1.0 / static_cast<double>(batch.size());
    for (const auto& g : batch) {
        check_group(policy, g);
        const auto lp = policy.log_probs(g.prompt);
        const double group_scale = batch_scale / static_cast<double>(g.actions.size());
        auto& out = grad[g.prompt];
        for (std::size_t i = 0; i < g.actions.size(); ++i) {
            const std::size_t a = g.actions[i];
            const double adv = g.advantages[i];
            const double ratio = std::exp(lp[a] - g.logp_old[i]);

            // d/d(log pi(a)) of min(r A, clip(r) A): r A while the unclipped branch is the minimum.
            const bool unclipped = adv >= 0.0 ? ratio <= 1.0 + cfg.clip_epsilon : ratio >= 1.0 - cfg.clip_epsilon;
            double coef = unclipped ? ratio * adv : 0.0;

            if (cfg.kl_estimator == KlEstimator::K3) {
                coef -= cfg.kl_beta * (1.0 - std::exp(g.logp_ref[i] - lp[a]));
            } else {
                coef -= cfg.kl_beta;
            }
            coef *= group_scale;

            // d log pi(a) / d z_j = [j == a] - pi_j
            for (std::size_t j = 0; j < out.size(); ++j) out[j] -= coef * std::exp(lp[j]);
            out[a] += coef;
        }
    }
    return grad;
}

double grpo_gradient_check(const ToyCategoricalPolicy& policy, const ToyBatch& batch, const GrpoConfig& cfg,
                           double step) {
    const auto analytic = toy_gradient(policy, batch, cfg);
    ToyCategoricalPolicy probe = policy;
    double worst = 0.0;
    for (std::size_t p = 0; p < probe.prompt_count(); ++p) {
        for (std::size_t j = 0; j < probe.logits(p).size(); ++j) {
            const double saved = probe.logits(p)[j];
            probe.logits(p)[j] = saved + step;
            const double up = toy_objective(probe, batch, cfg);
            probe.logits(p)[j] = saved - step;
            const double down = toy_objective(probe, batch, cfg);
            probe.logits(p)[j] = saved;
            worst = std::max(worst, std::abs((up - down) / (2.0 * step) - analytic[p][j]));
        }
    }
    return worst;
}

}  // namespace rolefocus
