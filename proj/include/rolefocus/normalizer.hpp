#pragma once

#include "rolefocus/reward.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace rolefocus {

enum class RewardType { Focus, FocusAttr, Ref };

inline constexpr std::array<RewardType, 3> kRewardTypes = {RewardType::Focus, RewardType::FocusAttr, RewardType::Ref};

std::string_view to_string(RewardType k) noexcept;
std::optional<RewardType> parse_reward_type(std::string_view s) noexcept;

double component(const RewardVector& r, RewardType k) noexcept;

/// Exponentially weighted running mean/variance. A fresh stat reads as
/// mean 0, var 1 so normalization starts as the identity.
struct RunningStat {
    double mean = 0.0;
    double var = 1.0;
    std::uint64_t count = 0;

    void update(double value, double decay) noexcept {
        const double delta = value - mean;
        mean = decay * mean + (1.0 - decay) * value;
        var = decay * var + (1.0 - decay) * delta * delta;
        ++count;
    }

    friend bool operator==(const RunningStat&, const RunningStat&) = default;
};

/// Standardized reward components, same layout as RewardVector.
struct NormalizedRewards {
    double focus = 0.0;
    double focus_attr = 0.0;
    double ref = 0.0;
    bool format_valid = false;

    friend bool operator==(const NormalizedRewards&, const NormalizedRewards&) = default;
};

struct WeightVector {
    double focus = 0.4;
    double attr = 0.2;
    double ref = 0.2;

    /// Throws std::invalid_argument on negative or non-finite weights.
    void validate() const;
};

class UnknownGroup : public std::out_of_range {
public:
    explicit UnknownGroup(std::size_t g) : std::out_of_range("unknown group index " + std::to_string(g)) {}
};

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by restore() for a document version this build cannot read.
class VersionError : public SnapshotError {
public:
    using SnapshotError::SnapshotError;
};

inline constexpr int kSnapshotVersion = 1;

/// Per-(group, reward type) running statistics.
///
/// The group bound is optional: when set, update() and normalize() reject
/// indices at or beyond it. It is a property of the installed group model and
/// is not persisted in snapshots.
class NormalizerState {
public:
    static constexpr double kDefaultDecay = 0.99;
    static constexpr double kDefaultEpsilon = 1e-8;

    explicit NormalizerState(double decay = kDefaultDecay, double epsilon = kDefaultEpsilon,
                             std::optional<std::size_t> group_count = std::nullopt);

    double decay() const noexcept { return decay_; }
    double epsilon() const noexcept { return epsilon_; }
    std::optional<std::size_t> group_count() const noexcept { return group_count_; }
    void set_group_count(std::optional<std::size_t> g) noexcept { group_count_ = g; }

    /// Stat for (group, k); a fresh one if never updated.
    RunningStat stat(std::size_t group, RewardType k) const;
    const std::map<std::pair<std::size_t, RewardType>, RunningStat>& stats() const noexcept { return stats_; }

    /// EMA update of all three components for `group`.
    void update(std::size_t group, const RewardVector& rewards);

    /// (r - mean) / sqrt(var + epsilon) per component; format_valid passes through.
    NormalizedRewards normalize(std::size_t group, const RewardVector& rewards) const;

    /// Direct stat installation (restore, tests).
    void set_stat(std::size_t group, RewardType k, const RunningStat& s);

    friend bool operator==(const NormalizerState&, const NormalizerState&) = default;

private:
    void check_group(std::size_t group) const;

    double decay_;
    double epsilon_;
    std::optional<std::size_t> group_count_;
    std::map<std::pair<std::size_t, RewardType>, RunningStat> stats_;
};

/// Functional form: returns the updated copy.
NormalizerState update(NormalizerState state, std::size_t group, const RewardVector& rewards);

NormalizedRewards normalize(const NormalizerState& state, std::size_t group, const RewardVector& rewards);

/// w_focus * focus + w_attr * focus_attr + w_ref * ref.
double aggregate(const NormalizedRewards& r, const WeightVector& w) noexcept;

/// JSON snapshot document, numbers in shortest round-trip form.
std::string snapshot(const NormalizerState& state);

/// Throws VersionError for unsupported versions and SnapshotError for
/// malformed documents.
NormalizerState restore(std::string_view document, std::optional<std::size_t> group_count = std::nullopt);

}  // namespace rolefocus
