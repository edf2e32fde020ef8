#include "doctest.h"
#include "support.hpp"

#include <cmath>

using namespace rolefocus;
using namespace testsupport;

namespace {

TokenSequence toks(std::vector<std::string> v) {
    return TokenSequence::from_tokens(std::move(v));
}

}  // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("I love swimming").tokens() == std::vector<std::string>{"i", "love", "swimming"});
    CHECK(tokenize("Hello, world!").tokens() == std::vector<std::string>{"hello", "world"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("  ... !!  ").empty());
    CHECK(tokenize("don't stop").tokens() == std::vector<std::string>{"don't", "stop"});
    CHECK(tokenize("\"Quoted.\"\tTAB\nline").tokens() == std::vector<std::string>{"quoted", "tab", "line"});
    CHECK(tokenize("ÉCOLE Straße").tokens() == std::vector<std::string>{"école", "straße"});
    CHECK(tokenize("ΑΒΓ").tokens() == std::vector<std::string>{"αβγ"});
    CHECK(tokenize("a　b").tokens() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("bleu config validation") {
    CHECK_NOTHROW(BleuConfig::unigram().validate());
    CHECK_NOTHROW(BleuConfig::cumulative(4).validate());
    CHECK_NOTHROW(BleuConfig::individual(2).validate());
    CHECK_THROWS((BleuConfig{0, {}, Smoothing::None}.validate()));
    CHECK_THROWS((BleuConfig{2, {1.0}, Smoothing::None}.validate()));
    CHECK_THROWS((BleuConfig{2, {0.7, 0.7}, Smoothing::None}.validate()));
    CHECK_THROWS((BleuConfig{2, {1.5, -0.5}, Smoothing::None}.validate()));
}

TEST_CASE("bleu hand examples") {
    CHECK(bleu(toks({"a", "b", "c"}), toks({"a", "b", "d"}), BleuConfig::unigram()) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(bleu1(toks({"fresh", "cream", "fruit", "cake"}), toks({"fruit", "cake"})) == doctest::Approx(0.5));
    CHECK(bleu1(tokenize("Original form"), tokenize("Original form")) == 1.0);
    CHECK(bleu1(toks({}), toks({"x"})) == 0.0);
    CHECK(bleu(toks({"a", "b"}), toks({"c", "d"}), BleuConfig::cumulative(2)) == 0.0);
    // Short candidate: brevity penalty exp(1 - 4/2).
    CHECK(bleu1(toks({"a", "b"}), toks({"a", "b", "c", "d"})) == doctest::Approx(std::exp(-1.0)));
    // Clipping: "the the the" against one "the".
    CHECK(bleu1(toks({"the", "the", "the"}), toks({"the", "cat", "sat"})) == doctest::Approx(1.0 / 3));
}

TEST_CASE("bleu identity and bounds") {
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        auto x = random_tokens(rng, 12, 6);
        auto y = random_tokens(rng, 12, 6);
        for (int n = 1; n <= 4; ++n) {
            const auto cfg = BleuConfig::cumulative(n);
            if (!x.empty()) CHECK(bleu(toks(x), toks(x), cfg) == doctest::Approx(1.0).epsilon(1e-15));
            const double v = bleu(toks(x), toks(y), cfg);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("bleu matches the counting oracle") {
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const auto c = random_tokens(rng, 15, 5);
        const auto r = random_tokens(rng, 15, 5);
        const int n = 1 + static_cast<int>(rng.below(4));
        std::vector<double> w(n);
        double s = 0;
        for (auto& x : w) s += (x = rng.uniform() < 0.2 ? 0.0 : rng.uniform());
        if (s == 0) w[0] = s = 1;
        for (auto& x : w) x /= s;
        const bool eps = rng.below(2) == 1;
        const BleuConfig cfg{n, w, eps ? Smoothing::AddEpsilon : Smoothing::None};
        CHECK(std::abs(bleu(toks(c), toks(r), cfg) - oracle_bleu(c, r, n, w, eps)) <= 1e-12);
        CHECK(std::abs(bleu1(toks(c), toks(r)) - oracle_bleu(c, r, 1, {1.0})) <= 1e-12);
    }
}

TEST_CASE("bleu is invariant under consistent token renaming") {
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const auto c = random_tokens(rng, 10, 4);
        const auto r = random_tokens(rng, 10, 4);
        auto rename = [](std::vector<std::string> v) {
            for (auto& t : v) t = "z" + t + "q";
            return v;
        };
        const auto cfg = BleuConfig::cumulative(3);
        CHECK(bleu(toks(c), toks(r), cfg) == bleu(toks(rename(c)), toks(rename(r)), cfg));
    }
}

TEST_CASE("add-epsilon smoothing keeps a dense signal") {
    const BleuConfig cfg{2, {0.5, 0.5}, Smoothing::AddEpsilon};
    const double v = bleu(toks({"a", "b"}), toks({"b", "a"}), cfg);
    CHECK(v > 0.0);
    CHECK(v == doctest::Approx(std::sqrt(1.0 * kSmoothingEpsilon)).epsilon(1e-12));
}

TEST_CASE("exact match") {
    CHECK(exact_match({FocusDimension::Knowledge}, {FocusDimension::Knowledge}) == 1);
    CHECK(exact_match({FocusDimension::Emotion, FocusDimension::Style}, {FocusDimension::Style, FocusDimension::Emotion}) == 1);
    CHECK(exact_match({FocusDimension::Knowledge}, {FocusDimension::Knowledge, FocusDimension::Memory}) == 0);
    CHECK(exact_match({}, {}) == 1);
    CHECK(exact_match({FocusDimension::Memory}, {}) == 0);
}
