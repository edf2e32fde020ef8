#pragma once

#include "rolefocus/trajectory.hpp"

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rolefocus {

/// Whitespace-free, lowercased, punctuation-trimmed tokens. Build with tokenize().
class TokenSequence {
public:
    TokenSequence() = default;

    /// Wraps pre-split tokens verbatim (test fixtures, oracles).
    static TokenSequence from_tokens(std::vector<std::string> tokens) {
        TokenSequence s;
        s.tokens_ = std::move(tokens);
        return s;
    }

    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    std::span<const std::string> view() const noexcept { return tokens_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

private:
    std::vector<std::string> tokens_;
};

/// Lowercase (simple case fold), split on Unicode whitespace, strip leading
/// and trailing punctuation from each token, drop empties. Throws InvalidUtf8.
TokenSequence tokenize(std::string_view text);

enum class Smoothing { None, AddEpsilon };

inline constexpr double kSmoothingEpsilon = 1e-9;

struct BleuConfig {
    int max_n = 1;
    std::vector<double> weights{1.0};
    Smoothing smoothing = Smoothing::None;

    /// Throws std::invalid_argument unless max_n >= 1, weights has max_n
    /// finite non-negative entries, and they sum to 1 within 1e-9.
    void validate() const;

    static BleuConfig unigram() { return {1, {1.0}, Smoothing::None}; }
    /// Cumulative BLEU-n with uniform weights.
    static BleuConfig cumulative(int n);
    /// Only the n-gram precision of order n (weights one-hot on n).
    static BleuConfig individual(int n);
};

/// Sentence BLEU against a single reference: clipped n-gram precisions,
/// weighted geometric mean, brevity penalty min(1, exp(1 - r/c)).
///
/// Candidates shorter than max_n are scored on the orders they can form
/// (weights of those orders renormalized, uniform if they sum to 0), so a
/// non-empty candidate identical to its reference always scores 1.
/// Orders with zero weight are skipped. An empty candidate scores 0, and
/// under Smoothing::None so does any zero precision.
double bleu(const TokenSequence& candidate, const TokenSequence& reference, const BleuConfig& cfg);

double bleu1(const TokenSequence& candidate, const TokenSequence& reference);

using FocusSet = std::set<FocusDimension>;

/// 1 iff the two label sets are equal, 0 otherwise.
int exact_match(const FocusSet& predicted, const FocusSet& gold);

}  // namespace rolefocus
