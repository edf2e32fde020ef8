#pragma once

#include "rolefocus/grpo.hpp"
#include "rolefocus/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace rolefocus {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kEnvPrefix = "ROLEFOCUS_";

/// Boot-time settings of the scoring service.
///
/// File keys: port, host, weights{focus,attr,ref}, decay, epsilon_norm,
/// epsilon_adv, clip_epsilon, kl_beta, ref_metrics, gate_after_normalize,
/// snapshot_path. Environment overrides use the ROLEFOCUS_ prefix with the
/// key upper-cased (ROLEFOCUS_PORT, ROLEFOCUS_KL_BETA, ROLEFOCUS_WEIGHTS_FOCUS, ...).
struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    WeightVector weights;
    double decay = 0.99;
    double epsilon_norm = 1e-8;
    double epsilon_adv = 1e-4;
    double clip_epsilon = 0.2;
    double kl_beta = 0.02;
    RefRewardConfig ref_metrics = RefRewardConfig::defaults();
    bool gate_after_normalize = false;
    // Stats snapshot written on clean shutdown when set.
    std::optional<std::filesystem::path> snapshot_path;

    PipelineConfig pipeline() const { return {weights, ref_metrics, gate_after_normalize}; }
    GrpoConfig grpo() const;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// Parses a JSON config document. Unknown keys are errors.
ServiceConfig config_from_json(const std::string& document);

/// Applies ROLEFOCUS_* overrides. `getenv` is injectable for tests.
void apply_env_overrides(ServiceConfig& cfg, const char* (*getenv_fn)(const char*) = nullptr);

/// File (optional) + environment, validated.
ServiceConfig load_config(const std::optional<std::filesystem::path>& path);

}  // namespace rolefocus
