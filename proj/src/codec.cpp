#include "rolefocus/codec.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace rolefocus::codec {

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + " must be an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + "." + key + " is required");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) throw SchemaError(path + "." + key + " must be a string");
    return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) throw SchemaError(path + "." + key + " must be a number");
    return v.get<double>();
}

namespace {

FocusDimension label_at(const json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path + " must be a focus label string");
    const auto dim = parse_focus_label(v.get<std::string>());
    if (!dim) throw SchemaError(path + " is not a known focus label: " + v.get<std::string>());
    return *dim;
}

}  // namespace

GoldAnnotation gold_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path + " must be an object");
    GoldAnnotation gold;
    if (j.contains("character_id")) gold.character_id = require_string(j, "character_id", path);

    const json& foci = require(j, "gold_foci", path);
    if (!foci.is_array()) throw SchemaError(path + ".gold_foci must be an array");
    for (std::size_t i = 0; i < foci.size(); ++i) {
        gold.gold_foci.insert(label_at(foci[i], path + ".gold_foci[" + std::to_string(i) + "]"));
    }

    if (j.contains("gold_attrs")) {
        const json& attrs = j["gold_attrs"];
        if (!attrs.is_object()) throw SchemaError(path + ".gold_attrs must be an object");
        for (const auto& [label, text] : attrs.items()) {
            const std::string at = path + ".gold_attrs." + label;
            const auto dim = parse_focus_label(label);
            if (!dim) throw SchemaError(at + " is not a known focus label");
            if (!text.is_string()) throw SchemaError(at + " must be a string");
            gold.gold_attrs[*dim] = text.get<std::string>();
        }
    }
    gold.reference_response = require_string(j, "reference_response", path);
    try {
        gold.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return gold;
}

json to_json(const GoldAnnotation& gold) {
    json j;
    if (!gold.character_id.empty()) j["character_id"] = gold.character_id;
    j["gold_foci"] = json::array();
    for (auto d : gold.gold_foci) j["gold_foci"].push_back(to_string(d));
    j["gold_attrs"] = json::object();
    for (const auto& [d, text] : gold.gold_attrs) j["gold_attrs"][std::string(to_string(d))] = text;
    j["reference_response"] = gold.reference_response;
    return j;
}

json to_json(const RewardVector& r) {
    json j;
    j["focus"] = r.focus;
    j["focus_attr"] = r.focus_attr;
    j["ref"] = r.ref;
    j["format_valid"] = r.format_valid;
    return j;
}

json to_json(const NormalizedRewards& r) {
    return json::array({r.focus, r.focus_attr, r.ref});
}

BleuConfig bleu_config_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path + " must be an object");
    BleuConfig cfg;
    const json& n = require(j, "max_n", path);
    if (!n.is_number_integer()) throw SchemaError(path + ".max_n must be an integer");
    cfg.max_n = n.get<int>();
    if (j.contains("weights")) {
        if (!j["weights"].is_array()) throw SchemaError(path + ".weights must be an array");
        cfg.weights.clear();
        for (const auto& w : j["weights"]) {
            if (!w.is_number()) throw SchemaError(path + ".weights must hold numbers");
            cfg.weights.push_back(w.get<double>());
        }
    } else {
        cfg.weights.assign(static_cast<std::size_t>(std::max(cfg.max_n, 0)), cfg.max_n > 0 ? 1.0 / cfg.max_n : 0.0);
    }
    if (j.contains("smoothing")) {
        const std::string s = require_string(j, "smoothing", path);
        if (s == "none") {
            cfg.smoothing = Smoothing::None;
        } else if (s == "add_epsilon") {
            cfg.smoothing = Smoothing::AddEpsilon;
        } else {
            throw SchemaError(path + ".smoothing must be none or add_epsilon");
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return cfg;
}

json to_json(const BleuConfig& cfg) {
    json j;
    j["max_n"] = cfg.max_n;
    j["weights"] = cfg.weights;
    j["smoothing"] = cfg.smoothing == Smoothing::None ? "none" : "add_epsilon";
    return j;
}

CharacterProfile profile_from_json(const json& j, const std::string& path) {
    CharacterProfile p;
    p.character_id = require_string(j, "character_id", path);
    if (j.contains("profile_text")) p.profile_text = require_string(j, "profile_text", path);
    if (j.contains("embedding") && !j["embedding"].is_null()) {
        const json& e = j["embedding"];
        if (!e.is_array()) throw SchemaError(path + ".embedding must be an array");
        for (const auto& v : e) {
            if (!v.is_number()) throw SchemaError(path + ".embedding must hold numbers");
            p.embedding.push_back(v.get<double>());
        }
    } else {
        p.embedding = hash_embed(p.profile_text);
    }
    return p;
}

json to_json(const CharacterProfile& p) {
    json j;
    j["character_id"] = p.character_id;
    j["profile_text"] = p.profile_text;
    j["embedding"] = p.embedding;
    return j;
}

std::vector<CharacterProfile> read_profiles_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profiles file " + path.string());
    std::vector<CharacterProfile> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError(where + ": invalid JSON");
        }
        out.push_back(profile_from_json(j, where));
    }
    return out;
}

json to_json(const GroupModel& model) {
    json j;
    j["cluster_count"] = model.cluster_count;
    j["seed"] = model.seed;
    j["iterations"] = model.iterations;
    j["centroids"] = model.centroids;
    j["assignments"] = json::object();
    for (const auto& [id, g] : model.assignments) j["assignments"][id] = g;
    j["inertia_trace"] = model.inertia_trace;
    return j;
}

GroupModel group_model_from_json(const json& j) {
    const std::string path = "model";
    GroupModel m;
    const json& g = require(j, "cluster_count", path);
    if (!g.is_number_unsigned() || g.get<std::size_t>() < 1) throw SchemaError("model.cluster_count must be >= 1");
    m.cluster_count = g.get<std::size_t>();
    if (j.contains("seed") && j["seed"].is_number_unsigned()) m.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("iterations") && j["iterations"].is_number_integer()) m.iterations = j["iterations"].get<int>();

    const json& cs = require(j, "centroids", path);
    if (!cs.is_array() || cs.size() != m.cluster_count) throw SchemaError("model.centroids must hold cluster_count vectors");
    for (const auto& c : cs) {
        if (!c.is_array() || c.empty()) throw SchemaError("model.centroids entries must be non-empty arrays");
        Embedding e;
        for (const auto& v : c) {
            if (!v.is_number()) throw SchemaError("model.centroids must hold numbers");
            e.push_back(v.get<double>());
        }
        if (!m.centroids.empty() && e.size() != m.centroids.front().size()) {
            throw SchemaError("model.centroids have inconsistent dimensions");
        }
        m.centroids.push_back(std::move(e));
    }
    if (j.contains("assignments")) {
        if (!j["assignments"].is_object()) throw SchemaError("model.assignments must be an object");
        for (const auto& [id, v] : j["assignments"].items()) {
            if (!v.is_number_unsigned() || v.get<std::size_t>() >= m.cluster_count) {
                throw SchemaError("model.assignments." + id + " must index a centroid");
            }
            m.assignments[id] = v.get<std::size_t>();
        }
    }
    if (j.contains("inertia_trace") && j["inertia_trace"].is_array()) {
        for (const auto& v : j["inertia_trace"]) m.inertia_trace.push_back(v.get<double>());
    }
    return m;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace rolefocus::codec
