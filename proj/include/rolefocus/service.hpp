#pragma once

#include "rolefocus/config.hpp"
#include "rolefocus/grouping.hpp"
#include "rolefocus/normalizer.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace rolefocus {

/// Batch-scoring service state and request handlers, independent of transport.
///
/// The group model is immutable once installed and swapped atomically. The
/// normalizer has a single writer: update_stats requests hold the exclusive
/// lock for their whole batch, read-only requests score against a copy taken
/// under the shared lock.
class ScoringService {
public:
    struct Reply {
        int status = 200;
        std::string body;
    };

    explicit ScoringService(ServiceConfig cfg);

    const ServiceConfig& config() const noexcept { return cfg_; }

    Reply score(const std::string& body);
    Reply fit_groups(const std::string& body);
    Reply upload_model(const std::string& body);
    Reply get_stats() const;
    Reply restore_stats(const std::string& body);
    Reply health() const;

    void install_model(GroupModel model);
    std::shared_ptr<const GroupModel> model() const;
    std::string stats_snapshot() const;
    std::uint64_t stats_version() const noexcept { return stats_version_.load(); }

private:
    ServiceConfig cfg_;

    mutable std::mutex model_mutex_;
    std::shared_ptr<const GroupModel> model_;
    std::atomic<bool> model_fitted_{false};

    mutable std::shared_mutex state_mutex_;
    NormalizerState state_;
    std::atomic<std::uint64_t> stats_version_{0};
};

/// HTTP/1.1 front end for a ScoringService.
class HttpFrontend {
public:
    explicit HttpFrontend(ScoringService& service);
    ~HttpFrontend();
    HttpFrontend(const HttpFrontend&) = delete;
    HttpFrontend& operator=(const HttpFrontend&) = delete;

    /// Binds the listening socket; port 0 picks a free port. Returns the
    /// bound port or throws std::runtime_error.
    int bind(const std::string& host, int port);

    /// Serves until stop(). Call after bind().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rolefocus
