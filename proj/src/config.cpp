#include "rolefocus/config.hpp"

#include "rolefocus/codec.hpp"

#include <cmath>
#include <cstdlib>

namespace rolefocus {

namespace {

using codec::json;

double number_at(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
}

double parse_double(const char* text, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(text, &end);
    if (end == text || *end != '\0') throw ConfigError("environment override for '" + key + "' is not a number");
    return v;
}

bool parse_bool(const char* text, const std::string& key) {
    const std::string s(text);
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw ConfigError("environment override for '" + key + "' must be true/false");
}

const char* system_getenv(const char* name) {
    return std::getenv(name);
}

}  // namespace

GrpoConfig ServiceConfig::grpo() const {
    GrpoConfig g;
    g.clip_epsilon = clip_epsilon;
    g.kl_beta = kl_beta;
    g.adv_epsilon = epsilon_adv;
    return g;
}

void ServiceConfig::validate() const {
    if (port < 0 || port > 65535) throw ConfigError("config key 'port' must lie in [0, 65535]");
    for (auto [key, w] : {std::pair{"weights.focus", weights.focus}, {"weights.attr", weights.attr}, {"weights.ref", weights.ref}}) {
        if (!std::isfinite(w) || w < 0.0) throw ConfigError(std::string("config key '") + key + "' must be finite and >= 0");
    }
    if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("config key 'decay' must lie in (0, 1)");
    if (!(epsilon_norm > 0.0) || !std::isfinite(epsilon_norm)) throw ConfigError("config key 'epsilon_norm' must be > 0");
    if (!(epsilon_adv > 0.0) || !std::isfinite(epsilon_adv)) throw ConfigError("config key 'epsilon_adv' must be > 0");
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("config key 'clip_epsilon' must lie in (0, 1)");
    if (!(kl_beta >= 0.0) || !std::isfinite(kl_beta)) throw ConfigError("config key 'kl_beta' must be >= 0");
    try {
        ref_metrics.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config key 'ref_metrics': ") + e.what());
    }
}

ServiceConfig config_from_json(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    ServiceConfig cfg;
    for (const auto& [key, v] : doc.items()) {
        if (key == "port") {
            if (!v.is_number_integer()) throw ConfigError("config key 'port' must be an integer");
            cfg.port = v.get<int>();
        } else if (key == "host") {
            if (!v.is_string()) throw ConfigError("config key 'host' must be a string");
            cfg.host = v.get<std::string>();
        } else if (key == "weights") {
            if (!v.is_object()) throw ConfigError("config key 'weights' must be an object");
            for (const auto& [wk, wv] : v.items()) {
                const std::string full = "weights." + wk;
                if (wk == "focus") {
                    cfg.weights.focus = number_at(wv, full);
                } else if (wk == "attr") {
                    cfg.weights.attr = number_at(wv, full);
                } else if (wk == "ref") {
                    cfg.weights.ref = number_at(wv, full);
                } else {
                    throw ConfigError("unknown config key '" + full + "'");
                }
            }
        } else if (key == "decay") {
            cfg.decay = number_at(v, key);
        } else if (key == "epsilon_norm") {
            cfg.epsilon_norm = number_at(v, key);
        } else if (key == "epsilon_adv") {
            cfg.epsilon_adv = number_at(v, key);
        } else if (key == "clip_epsilon") {
            cfg.clip_epsilon = number_at(v, key);
        } else if (key == "kl_beta") {
            cfg.kl_beta = number_at(v, key);
        } else if (key == "ref_metrics") {
            if (!v.is_array()) throw ConfigError("config key 'ref_metrics' must be an array");
            cfg.ref_metrics.metrics.clear();
            for (std::size_t i = 0; i < v.size(); ++i) {
                try {
                    cfg.ref_metrics.metrics.push_back(codec::bleu_config_from_json(v[i], "ref_metrics[" + std::to_string(i) + "]"));
                } catch (const codec::SchemaError& e) {
                    throw ConfigError(std::string("config key ") + e.what());
                }
            }
        } else if (key == "gate_after_normalize") {
            if (!v.is_boolean()) throw ConfigError("config key 'gate_after_normalize' must be a boolean");
            cfg.gate_after_normalize = v.get<bool>();
        } else if (key == "snapshot_path") {
            if (!v.is_string()) throw ConfigError("config key 'snapshot_path' must be a string");
            cfg.snapshot_path = v.get<std::string>();
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

void apply_env_overrides(ServiceConfig& cfg, const char* (*getenv_fn)(const char*)) {
    if (getenv_fn == nullptr) getenv_fn = system_getenv;
    auto env = [&](const char* suffix) { return getenv_fn((std::string(kEnvPrefix) + suffix).c_str()); };

    if (const char* v = env("PORT")) cfg.port = static_cast<int>(parse_double(v, "port"));
    if (const char* v = env("HOST")) cfg.host = v;
    if (const char* v = env("WEIGHTS_FOCUS")) cfg.weights.focus = parse_double(v, "weights.focus");
    if (const char* v = env("WEIGHTS_ATTR")) cfg.weights.attr = parse_double(v, "weights.attr");
    if (const char* v = env("WEIGHTS_REF")) cfg.weights.ref = parse_double(v, "weights.ref");
    if (const char* v = env("DECAY")) cfg.decay = parse_double(v, "decay");
    if (const char* v = env("EPSILON_NORM")) cfg.epsilon_norm = parse_double(v, "epsilon_norm");
    if (const char* v = env("EPSILON_ADV")) cfg.epsilon_adv = parse_double(v, "epsilon_adv");
    if (const char* v = env("CLIP_EPSILON")) cfg.clip_epsilon = parse_double(v, "clip_epsilon");
    if (const char* v = env("KL_BETA")) cfg.kl_beta = parse_double(v, "kl_beta");
    if (const char* v = env("GATE_AFTER_NORMALIZE")) cfg.gate_after_normalize = parse_bool(v, "gate_after_normalize");
    if (const char* v = env("SNAPSHOT_PATH")) cfg.snapshot_path = std::string(v);
}

ServiceConfig load_config(const std::optional<std::filesystem::path>& path) {
    ServiceConfig cfg = path ? config_from_json(codec::read_file(*path)) : ServiceConfig{};
    apply_env_overrides(cfg);
    cfg.validate();
    return cfg;
}

}  // namespace rolefocus
