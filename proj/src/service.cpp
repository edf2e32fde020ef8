#include "rolefocus/service.hpp"

#include "rolefocus/codec.hpp"
#include "rolefocus/pipeline.hpp"
#include "rolefocus/utf8.hpp"

#include "httplib.h"

#include <set>
#include <stdexcept>

namespace rolefocus {

namespace {

using codec::json;

ScoringService::Reply error_reply(int status, const std::string& message) {
    json j;
    j["error"] = message;
    j["status"] = status;
    return {status, j.dump()};
}

std::optional<json> parse_body(const std::string& body, ScoringService::Reply& failure) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        failure = error_reply(400, std::string("malformed JSON: ") + e.what());
        return std::nullopt;
    }
}

}  // namespace

ScoringService::ScoringService(ServiceConfig cfg)
    : cfg_(std::move(cfg)), state_(cfg_.decay, cfg_.epsilon_norm) {
    cfg_.validate();
}

std::shared_ptr<const GroupModel> ScoringService::model() const {
    std::lock_guard lock(model_mutex_);
    return model_;
}

void ScoringService::install_model(GroupModel model) {
    const std::size_t groups = model.cluster_count;
    auto shared = std::make_shared<const GroupModel>(std::move(model));
    {
        std::unique_lock lock(state_mutex_);
        state_.set_group_count(groups);
    }
    std::lock_guard lock(model_mutex_);
    model_ = std::move(shared);
    model_fitted_ = true;
}

std::string ScoringService::stats_snapshot() const {
    std::shared_lock lock(state_mutex_);
    return snapshot(state_);
}

ScoringService::Reply ScoringService::score(const std::string& body) {
    Reply failure;
    const auto doc = parse_body(body, failure);
    if (!doc) return failure;

    std::vector<ScoreItem> items;
    bool update = false;
    try {
        const json& arr = codec::require(*doc, "items", "request");
        if (!arr.is_array() || arr.empty()) return error_reply(400, "request.items must be a non-empty array");
        if (doc->contains("update_stats")) {
            if (!(*doc)["update_stats"].is_boolean()) return error_reply(400, "request.update_stats must be a boolean");
            update = (*doc)["update_stats"].get<bool>();
        }
        std::set<std::string> ids;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string path = "request.items[" + std::to_string(i) + "]";
            const std::string id = codec::require_string(arr[i], "request_id", path);
            if (!ids.insert(id).second) return error_reply(400, path + ".request_id duplicates '" + id + "'");
            items.push_back(score_item_from_json(arr[i], path, id));
        }
    } catch (const codec::SchemaError& e) {
        return error_reply(400, e.what());
    }

    const auto model = this->model();
    if (!model) return error_reply(409, "no group model fitted");

    const PipelineConfig pipeline = cfg_.pipeline();
    json out;
    out["items"] = json::array();
    try {
        if (update) {
            std::unique_lock lock(state_mutex_);
            for (const auto& item : items) {
                out["items"].push_back(to_json(score_item(item, *model, state_, pipeline, true)));
                ++stats_version_;
            }
            out["stats_version"] = stats_version_.load();
        } else {
            NormalizerState view = [&] {
                std::shared_lock lock(state_mutex_);
                out["stats_version"] = stats_version_.load();
                return state_;
            }();
            for (const auto& item : items) out["items"].push_back(to_json(score_item(item, *model, view, pipeline, false)));
        }
    } catch (const InvalidUtf8& e) {
        return error_reply(400, e.what());
    } catch (const std::exception& e) {
        return error_reply(500, e.what());
    }
    // Keep stats_version after items in the document.
    auto version = out["stats_version"];
    out.erase("stats_version");
    out["stats_version"] = version;
    return {200, out.dump()};
}

ScoringService::Reply ScoringService::fit_groups(const std::string& body) {
    Reply failure;
    const auto doc = parse_body(body, failure);
    if (!doc) return failure;
    if (!doc->is_object()) return error_reply(400, "request must be a JSON object");

    std::vector<CharacterProfile> profiles;
    std::size_t clusters = kDefaultClusterCount;
    std::uint64_t seed = 0;
    int max_iters = kDefaultMaxIters;
    try {
        if (doc->contains("profiles")) {
            const json& arr = (*doc)["profiles"];
            if (!arr.is_array()) return error_reply(400, "request.profiles must be an array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                profiles.push_back(codec::profile_from_json(arr[i], "request.profiles[" + std::to_string(i) + "]"));
            }
        } else if (doc->contains("profiles_path")) {
            profiles = codec::read_profiles_jsonl(codec::require_string(*doc, "profiles_path", "request"));
        } else {
            return error_reply(400, "request needs profiles or profiles_path");
        }
        if (doc->contains("G")) {
            const json& g = (*doc)["G"];
            if (!g.is_number_integer() || g.get<std::int64_t>() < 1) return error_reply(400, "request.G must be an integer >= 1");
            clusters = g.get<std::size_t>();
        }
        if (doc->contains("seed")) {
            if (!(*doc)["seed"].is_number_unsigned()) return error_reply(400, "request.seed must be a non-negative integer");
            seed = (*doc)["seed"].get<std::uint64_t>();
        }
        if (doc->contains("max_iters")) {
            const json& m = (*doc)["max_iters"];
            if (!m.is_number_integer() || m.get<int>() < 1) return error_reply(400, "request.max_iters must be >= 1");
            max_iters = m.get<int>();
        }
    } catch (const codec::SchemaError& e) {
        return error_reply(400, e.what());
    } catch (const std::runtime_error& e) {
        return error_reply(400, e.what());
    }

    GroupModel model;
    double total_inertia = 0.0;
    std::optional<double> sil;
    try {
        model = fit_kmeans(profiles, clusters, seed, max_iters);
        total_inertia = inertia(model, profiles);
        if (clusters >= 2) {
            try {
                sil = silhouette(model, profiles);
            } catch (const GroupingError&) {
            }
        }
    } catch (const TooFewProfiles& e) {
        return error_reply(422, e.what());
    } catch (const GroupingError& e) {
        return error_reply(400, e.what());
    }

    json out;
    out["G"] = clusters;
    out["inertia"] = total_inertia;
    out["silhouette"] = sil ? json(*sil) : json(nullptr);
    out["iterations"] = model.iterations;
    install_model(std::move(model));
    return {200, out.dump()};
}

ScoringService::Reply ScoringService::upload_model(const std::string& body) {
    Reply failure;
    const auto doc = parse_body(body, failure);
    if (!doc) return failure;
    try {
        GroupModel model = codec::group_model_from_json(*doc);
        json out;
        out["G"] = model.cluster_count;
        install_model(std::move(model));
        return {200, out.dump()};
    } catch (const codec::SchemaError& e) {
        return error_reply(400, e.what());
    }
}

ScoringService::Reply ScoringService::get_stats() const {
    return {200, stats_snapshot()};
}

ScoringService::Reply ScoringService::restore_stats(const std::string& body) {
    const auto model = this->model();
    const auto groups = model ? std::optional<std::size_t>(model->cluster_count) : std::nullopt;
    try {
        NormalizerState restored = restore(body, groups);
        std::unique_lock lock(state_mutex_);
        state_ = std::move(restored);
        ++stats_version_;
    } catch (const VersionError& e) {
        return error_reply(422, e.what());
    } catch (const SnapshotError& e) {
        return error_reply(400, e.what());
    }
    return {200, R"({"ok":true})"};
}

ScoringService::Reply ScoringService::health() const {
    json out;
    out["status"] = "ok";
    out["model_fitted"] = model_fitted_.load();
    out["stats_version"] = stats_version_.load();
    return {200, out.dump()};
}

struct HttpFrontend::Impl {
    ScoringService& service;
    httplib::Server server;

    explicit Impl(ScoringService& s) : service(s) {
        auto send = [](httplib::Response& res, const ScoringService::Reply& reply) {
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        };
        server.Post("/v1/score", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, service.score(req.body));
        });
        server.Post("/v1/groups/fit", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, service.fit_groups(req.body));
        });
        server.Post("/v1/groups/model", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, service.upload_model(req.body));
        });
        server.Get("/v1/stats", [this, send](const httplib::Request&, httplib::Response& res) {
            send(res, service.get_stats());
        });
        server.Post("/v1/stats/restore", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, service.restore_stats(req.body));
        });
        server.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) {
            send(res, service.health());
        });
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            const auto reply = error_reply(500, what);
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
    }
};

HttpFrontend::HttpFrontend(ScoringService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpFrontend::~HttpFrontend() {
    stop();
}

int HttpFrontend::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw std::runtime_error("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpFrontend::run() {
    impl_->server.listen_after_bind();
}

void HttpFrontend::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace rolefocus
