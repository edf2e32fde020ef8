#include "rolefocus/text_metrics.hpp"

#include "rolefocus/utf8.hpp"

#include <algorithm>
#include <cmath>
#include <locale.h>
#include <numeric>
#include <stdexcept>
#include <wctype.h>

namespace rolefocus {

namespace {

locale_t utf8_locale() {
    static const locale_t loc = [] {
        locale_t l = newlocale(LC_ALL_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
        if (l == static_cast<locale_t>(nullptr)) l = newlocale(LC_ALL_MASK, "C.utf8", static_cast<locale_t>(nullptr));
        if (l == static_cast<locale_t>(nullptr)) throw std::runtime_error("C.UTF-8 locale unavailable");
        return l;
    }();
    return loc;
}

// towlower gives the simple lowercase mapping; these code points fold
// differently from how they lowercase.
char32_t fold_case(char32_t cp, locale_t loc) {
    switch (cp) {
        case 0x03C2: return 0x03C3;  // final sigma
        case 0x03D0: return 0x03B2;
        case 0x03D1: return 0x03B8;
        case 0x03D5: return 0x03C6;
        case 0x03D6: return 0x03C0;
        case 0x03F0: return 0x03BA;
        case 0x03F1: return 0x03C1;
        case 0x03F5: return 0x03B5;
        case 0x1E9B: return 0x1E61;
        case 0x00B5: return 0x03BC;  // micro sign
        case 0x017F: return 0x0073;  // long s
        default: break;
    }
    return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
}

// Number of clipped n-gram matches and candidate n-gram total for order n.
struct NgramCounts {
    std::size_t matched = 0;
    std::size_t total = 0;
};

using Gram = std::span<const std::string>;

bool gram_less(Gram a, Gram b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool gram_equal(Gram a, Gram b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<Gram> sorted_grams(std::span<const std::string> tokens, std::size_t n) {
    std::vector<Gram> grams;
    if (tokens.size() < n) return grams;
    grams.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) grams.push_back(tokens.subspan(i, n));
    std::sort(grams.begin(), grams.end(), gram_less);
    return grams;
}

NgramCounts count_ngrams(std::span<const std::string> cand, std::span<const std::string> ref, std::size_t n) {
    const auto c = sorted_grams(cand, n);
    const auto r = sorted_grams(ref, n);
    NgramCounts counts{0, c.size()};
    std::size_t i = 0, j = 0;
    while (i < c.size() && j < r.size()) {
        if (gram_less(c[i], r[j])) {
            ++i;
        } else if (gram_less(r[j], c[i])) {
            ++j;
        } else {
            std::size_t ci = i, rj = j;
            while (ci < c.size() && gram_equal(c[ci], c[i])) ++ci;
            while (rj < r.size() && gram_equal(r[rj], r[j])) ++rj;
            counts.matched += std::min(ci - i, rj - j);
            i = ci;
            j = rj;
        }
    }
    return counts;
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
    utf8::require_valid(text);
    const locale_t loc = utf8_locale();

    std::vector<std::string> tokens;
    std::vector<char32_t> word;
    auto flush = [&] {
        auto first = word.begin();
        auto last = word.end();
        while (first != last && iswpunct_l(static_cast<wint_t>(*first), loc)) ++first;
        while (last != first && iswpunct_l(static_cast<wint_t>(*(last - 1)), loc)) --last;
        if (first != last) {
            std::string tok;
            for (auto it = first; it != last; ++it) utf8::append(tok, *it);
            tokens.push_back(std::move(tok));
        }
        word.clear();
    };

    for (char32_t cp : utf8::decode(text)) {
        if (iswspace_l(static_cast<wint_t>(cp), loc)) {
            flush();
        } else {
            word.push_back(fold_case(cp, loc));
        }
    }
    flush();
    return TokenSequence::from_tokens(std::move(tokens));
}

void BleuConfig::validate() const {
    if (max_n < 1) throw std::invalid_argument("BleuConfig.max_n must be >= 1");
    if (weights.size() != static_cast<std::size_t>(max_n)) {
        throw std::invalid_argument("BleuConfig.weights must have max_n entries");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("BleuConfig.weights must be finite and >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("BleuConfig.weights must sum to 1");
}

BleuConfig BleuConfig::cumulative(int n) {
    return {n, std::vector<double>(static_cast<std::size_t>(n), 1.0 / n), Smoothing::None};
}

BleuConfig BleuConfig::individual(int n) {
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    w.back() = 1.0;
    return {n, std::move(w), Smoothing::None};
}

double bleu(const TokenSequence& candidate, const TokenSequence& reference, const BleuConfig& cfg) {
    cfg.validate();
    const std::size_t c = candidate.size();
    const std::size_t r = reference.size();
    if (c == 0) return 0.0;

    const std::size_t n_eff = std::min(static_cast<std::size_t>(cfg.max_n), c);
    std::vector<double> w(cfg.weights.begin(), cfg.weights.begin() + static_cast<std::ptrdiff_t>(n_eff));
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x = wsum > 0.0 ? x / wsum : 1.0 / static_cast<double>(n_eff);

    double log_precision = 0.0;
    for (std::size_t n = 1; n <= n_eff; ++n) {
        if (w[n - 1] == 0.0) continue;
        const NgramCounts counts = count_ngrams(candidate.view(), reference.view(), n);
        double p;
        if (counts.matched == 0) {
            if (cfg.smoothing == Smoothing::None) return 0.0;
            p = kSmoothingEpsilon / static_cast<double>(counts.total);
        } else {
            p = static_cast<double>(counts.matched) / static_cast<double>(counts.total);
        }
        log_precision += w[n - 1] * std::log(p);
    }

    const double bp = c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * std::exp(log_precision);
}

double bleu1(const TokenSequence& candidate, const TokenSequence& reference) {
    static const BleuConfig cfg = BleuConfig::unigram();
    return bleu(candidate, reference, cfg);
}

int exact_match(const FocusSet& predicted, const FocusSet& gold) {
    return predicted == gold ? 1 : 0;
}

}  // namespace rolefocus
