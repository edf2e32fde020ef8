#include "rolefocus/toy_trainer.hpp"

#include "rolefocus/random.hpp"

#include <cmath>
#include <cstdio>
#include <array>
#include <map>

namespace rolefocus {

namespace {

std::size_t sample(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        acc += probs[j];
        if (u < acc) return j;
    }
    return probs.size() - 1;
}

// Mean/variance of each reward type under the reference policy, pooled over
// the prompts of each role group.
std::map<std::size_t, std::array<RunningStat, 3>> reference_stats(const ToyTask& task,
                                                                    const std::vector<std::vector<RewardVector>>& table,
                                                                    const ToyCategoricalPolicy& ref) {
    std::map<std::size_t, std::array<double, 3>> sum, sum_sq;
    std::map<std::size_t, double> weight;
    for (std::size_t p = 0; p < task.prompts.size(); ++p) {
        const std::size_t g = task.prompts[p].group;
        const auto pi = ref.probs(p);
        weight[g] += 1.0;
        for (std::size_t m = 0; m < pi.size(); ++m) {
            for (std::size_t k = 0; k < 3; ++k) {
                const double r = component(table[p][m], kRewardTypes[k]);
                sum[g][k] += pi[m] * r;
                sum_sq[g][k] += pi[m] * r * r;
            }
        }
    }
    std::map<std::size_t, std::array<RunningStat, 3>> out;
    for (const auto& [g, w] : weight) {
        for (std::size_t k = 0; k < 3; ++k) {
            const double mean = sum[g][k] / w;
            out[g][k] = {mean, std::max(0.0, sum_sq[g][k] / w - mean * mean), 1};
        }
    }
    return out;
}

TrainingRecord expected_metrics(const ToyTask& task, const std::vector<std::vector<RewardVector>>& table,
                                const ToyCategoricalPolicy& policy,
                                const std::map<std::size_t, std::array<RunningStat, 3>>& yardstick,
                                const WeightVector& weights, double epsilon) {
    TrainingRecord rec;
    for (std::size_t p = 0; p < task.prompts.size(); ++p) {
        const auto pi = policy.probs(p);
        const auto& stats = yardstick.at(task.prompts[p].group);
        for (std::size_t m = 0; m < pi.size(); ++m) {
            const RewardVector& r = table[p][m];
            NormalizedRewards n{(r.focus - stats[0].mean) / std::sqrt(stats[0].var + epsilon),
                                (r.focus_attr - stats[1].mean) / std::sqrt(stats[1].var + epsilon),
                                (r.ref - stats[2].mean) / std::sqrt(stats[2].var + epsilon), r.format_valid};
            rec.r_focus += pi[m] * r.focus;
            rec.r_attr += pi[m] * r.focus_attr;
            rec.r_ref += pi[m] * r.ref;
            rec.r_scalar += pi[m] * aggregate(n, weights);
        }
    }
    const double n = static_cast<double>(task.prompts.size());
    rec.r_focus /= n;
    rec.r_attr /= n;
    rec.r_ref /= n;
    rec.r_scalar /= n;
    return rec;
}

}  // namespace

TrainingResult run_training(const ToyTask& task, const ToyTrainingOptions& opts, NormalizerState norm) {
    task.validate();
    opts.grpo.validate();
    opts.weights.validate();
    opts.ref.validate();
    if (opts.steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (!(opts.lr > 0.0) || !std::isfinite(opts.lr)) throw std::invalid_argument("lr must be finite and > 0");
    const std::size_t m = task.candidates_per_prompt();
    if (opts.grpo.grpo_group_size > m) throw std::invalid_argument("grpo_group_size exceeds the candidate pool size");

    std::vector<std::vector<RewardVector>> table(task.prompts.size());
    for (std::size_t p = 0; p < task.prompts.size(); ++p) {
        for (const auto& raw : task.candidate_pool[p]) table[p].push_back(score_trajectory(raw, task.prompts[p].gold, opts.ref));
    }

    const std::size_t prompt_count = task.prompts.size();
    const ToyCategoricalPolicy reference = ToyCategoricalPolicy::uniform(prompt_count, m);
    std::vector<std::vector<double>> ref_logp(prompt_count);
    for (std::size_t p = 0; p < prompt_count; ++p) ref_logp[p] = reference.log_probs(p);
    const auto yardstick = reference_stats(task, table, reference);

    TrainingResult result{{}, reference, std::move(norm), {}};
    result.initial = expected_metrics(task, table, result.policy, yardstick, opts.weights, result.normalizer.epsilon());
    Rng rng(task.seed);

    for (int step = 1; step <= opts.steps; ++step) {
        ToyBatch batch;
        batch.reserve(prompt_count);
        for (std::size_t p = 0; p < prompt_count; ++p) {
            const auto old_logp = result.policy.log_probs(p);
            const auto old_probs = result.policy.probs(p);
            const std::size_t group = task.prompts[p].group;

            ToyPromptGroup g;
            g.prompt = p;
            for (std::size_t i = 0; i < opts.grpo.grpo_group_size; ++i) g.actions.push_back(sample(old_probs, rng));
            for (auto a : g.actions) result.normalizer.update(group, table[p][a]);

            std::vector<double> scalars;
            for (auto a : g.actions) {
                scalars.push_back(aggregate(result.normalizer.normalize(group, table[p][a]), opts.weights));
                g.logp_old.push_back(old_logp[a]);
                g.logp_ref.push_back(ref_logp[p][a]);
            }
            g.advantages = group_advantages(scalars, opts.grpo.adv_epsilon);
            batch.push_back(std::move(g));
        }

        // Prompts own disjoint logits, so each ascends its own group objective:
        // the batch-mean gradient scaled back up by the prompt count.
        const auto grad = toy_gradient(result.policy, batch, opts.grpo);
        const double scale = opts.lr * static_cast<double>(prompt_count);
        for (std::size_t p = 0; p < prompt_count; ++p) {
            auto& z = result.policy.logits(p);
            for (std::size_t j = 0; j < z.size(); ++j) z[j] += scale * grad[p][j];
        }

        TrainingRecord rec =
            expected_metrics(task, table, result.policy, yardstick, opts.weights, result.normalizer.epsilon());
        rec.step = step;
        rec.objective = toy_objective(result.policy, batch, opts.grpo);
        result.log.push_back(rec);
    }
    return result;
}

std::string curves_csv(const TrainingLog& log) {
    std::string out = "step,r_focus,r_attr,r_ref,r_scalar,objective\n";
    char buf[256];
    for (const auto& r : log) {
        std::snprintf(buf, sizeof buf, "%d,%.6g,%.6g,%.6g,%.6g,%.6g\n", r.step, r.r_focus, r.r_attr, r.r_ref, r.r_scalar,
                      r.objective);
        out += buf;
    }
    return out;
}

void emit_curves(const TrainingLog& log, const std::filesystem::path& path) {
    codec::write_file(path, curves_csv(log));
}

}  // namespace rolefocus
