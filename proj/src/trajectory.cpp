#include "rolefocus/trajectory.hpp"

#include "rolefocus/utf8.hpp"

#include <algorithm>

namespace rolefocus {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kFocusOpen = "<focus>";
constexpr std::string_view kFocusClose = "</focus>";
constexpr std::string_view kAttrOpen = "<focus_attr>";
constexpr std::string_view kAttrClose = "</focus_attr>";
constexpr std::string_view kBoxedOpen = "\\boxed{";

constexpr std::array<std::string_view, 6> kTags = {kThinkOpen, kThinkClose, kFocusOpen,
                                                   kFocusClose, kAttrOpen,  kAttrClose};

constexpr std::array<std::string_view, 10> kLabelNames = {
    "Knowledge", "Style", "Worldview", "Emotion", "Empathetic",
    "Engagement", "Human_Like", "Extension", "Memory", "Safety",
};

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

struct TagHit {
    std::size_t pos = std::string_view::npos;
    std::string_view tag;
};

TagHit find_next_tag(std::string_view text, std::size_t from) {
    for (std::size_t i = text.find('<', from); i != std::string_view::npos; i = text.find('<', i + 1)) {
        for (auto tag : kTags) {
            if (text.substr(i, tag.size()) == tag) return {i, tag};
        }
    }
    return {};
}

bool contains_tag(std::string_view text) {
    return find_next_tag(text, 0).pos != std::string_view::npos;
}

// Content of a brace-balanced group whose opening brace ends at `start`,
// or nullopt when the group never closes.
std::optional<std::string_view> balanced_group(std::string_view text, std::size_t start) {
    int depth = 1;
    for (std::size_t i = start; i < text.size(); ++i) {
        if (text[i] == '{') {
            ++depth;
        } else if (text[i] == '}' && --depth == 0) {
            return text.substr(start, i - start);
        }
    }
    return std::nullopt;
}

bool braces_balanced(std::string_view s) {
    int depth = 0;
    for (char c : s) {
        if (c == '{') ++depth;
        if (c == '}' && --depth < 0) return false;
    }
    return depth == 0;
}

class ThinkScanner {
public:
    ThinkScanner(ParsedTrajectory& out) : out_(out) {}

    void scan(std::string_view inner) {
        std::size_t pos = 0;
        while (pos < inner.size()) {
            const TagHit hit = find_next_tag(inner, pos);
            if (hit.pos == std::string_view::npos) {
                out_.think_text.append(inner.substr(pos));
                break;
            }
            out_.think_text.append(inner.substr(pos, hit.pos - pos));
            pos = hit.pos + hit.tag.size();

            if (hit.tag == kFocusOpen) {
                pos = on_focus(inner, pos);
            } else if (hit.tag == kAttrOpen) {
                pos = on_attr(inner, pos);
            } else if (hit.tag == kThinkOpen || hit.tag == kThinkClose) {
                error(DiagnosticCode::ExtraThinkBlock, std::string(hit.tag));
            } else {
                error(DiagnosticCode::StrayTag, std::string(hit.tag));
            }
        }
        settle_pending();
    }

private:
    enum class Pending { None, Known, Unknown };

    std::size_t on_focus(std::string_view inner, std::size_t pos) {
        settle_pending();
        const TagHit next = find_next_tag(inner, pos);
        if (next.tag != kFocusClose) {
            error(DiagnosticCode::UnclosedTag, "focus");
            return next.pos == std::string_view::npos ? inner.size() : next.pos;
        }
        const std::string_view label = trim(inner.substr(pos, next.pos - pos));
        if (auto dim = parse_focus_label(label)) {
            out_.foci.push_back({*dim, {}, out_.think_text.size()});
            pending_ = Pending::Known;
        } else {
            error(DiagnosticCode::UnknownFocusLabel, std::string(label));
            pending_ = Pending::Unknown;
        }
        return next.pos + kFocusClose.size();
    }

    std::size_t on_attr(std::string_view inner, std::size_t pos) {
        const Pending owner = pending_;
        pending_ = Pending::None;
        if (owner == Pending::None) error(DiagnosticCode::StrayTag, "focus_attr");

        const TagHit next = find_next_tag(inner, pos);
        if (next.tag != kAttrClose) {
            error(DiagnosticCode::UnclosedTag, "focus_attr");
            return next.pos == std::string_view::npos ? inner.size() : next.pos;
        }
        if (owner == Pending::Known) out_.foci.back().attribute = std::string(trim(inner.substr(pos, next.pos - pos)));
        return next.pos + kAttrClose.size();
    }

    void settle_pending() {
        if (pending_ == Pending::Known) {
            out_.diagnostics.push_back(
                {DiagnosticCode::MissingAttr, Severity::Warning, std::string(to_string(out_.foci.back().dimension))});
        }
        pending_ = Pending::None;
    }

    void error(DiagnosticCode code, std::string detail) {
        out_.diagnostics.push_back({code, Severity::Error, std::move(detail)});
    }

    ParsedTrajectory& out_;
    Pending pending_ = Pending::None;
};

void extract_answer(std::string_view tail, ParsedTrajectory& out) {
    if (const auto at = tail.find(kBoxedOpen); at != std::string_view::npos) {
        if (auto group = balanced_group(tail, at + kBoxedOpen.size())) {
            out.answer = std::string(trim(*group));
            out.answer_was_boxed = true;
        } else {
            out.diagnostics.push_back({DiagnosticCode::UnclosedTag, Severity::Error, "boxed"});
        }
    } else {
        out.answer = std::string(trim(tail));
        if (!out.answer.empty()) out.diagnostics.push_back({DiagnosticCode::AnswerNotBoxed, Severity::Warning, {}});
    }
    if (out.answer.empty()) out.diagnostics.push_back({DiagnosticCode::MissingAnswer, Severity::Error, {}});
}

}  // namespace

std::string_view to_string(FocusDimension d) noexcept {
    return kLabelNames[static_cast<std::size_t>(d)];
}

std::optional<FocusDimension> parse_focus_label(std::string_view label) {
    label = trim(label);
    std::string key;
    key.reserve(label.size());
    for (char c : label) {
        if (c == ' ' || c == '-') c = '_';
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        key.push_back(c);
    }
    for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
        const auto name = kLabelNames[i];
        if (name.size() == key.size() &&
            std::equal(name.begin(), name.end(), key.begin(), [](char a, char b) {
                return (a >= 'A' && a <= 'Z' ? static_cast<char>(a - 'A' + 'a') : a) == b;
            })) {
            return kAllFocusDimensions[i];
        }
    }
    return std::nullopt;
}

std::string_view to_string(DiagnosticCode c) noexcept {
    switch (c) {
        case DiagnosticCode::MissingThinkBlock: return "MissingThinkBlock";
        case DiagnosticCode::ExtraThinkBlock: return "ExtraThinkBlock";
        case DiagnosticCode::UnclosedTag: return "UnclosedTag";
        case DiagnosticCode::StrayTag: return "StrayTag";
        case DiagnosticCode::UnknownFocusLabel: return "UnknownFocusLabel";
        case DiagnosticCode::MissingAttr: return "MissingAttr";
        case DiagnosticCode::MissingAnswer: return "MissingAnswer";
        case DiagnosticCode::AnswerNotBoxed: return "AnswerNotBoxed";
    }
    return "Unknown";
}

std::string_view to_string(Severity s) noexcept {
    return s == Severity::Error ? "error" : "warning";
}

ParsedTrajectory parse_trajectory(std::string_view raw) {
    utf8::require_valid(raw);

    ParsedTrajectory out;
    const std::size_t open = raw.find(kThinkOpen);
    if (open == std::string_view::npos) {
        out.diagnostics.push_back({DiagnosticCode::MissingThinkBlock, Severity::Error, {}});
        // Only a boxed answer is recoverable without the think delimiter.
        if (const auto at = raw.find(kBoxedOpen); at != std::string_view::npos) {
            extract_answer(raw.substr(at), out);
        } else {
            out.diagnostics.push_back({DiagnosticCode::MissingAnswer, Severity::Error, {}});
        }
    } else {
        const std::size_t body = open + kThinkOpen.size();
        const std::size_t close = raw.find(kThinkClose, body);
        std::string_view inner;
        std::string_view tail;
        if (close == std::string_view::npos) {
            inner = raw.substr(body);
            out.diagnostics.push_back({DiagnosticCode::UnclosedTag, Severity::Error, "think"});
        } else {
            inner = raw.substr(body, close - body);
            tail = raw.substr(close + kThinkClose.size());
        }

        ThinkScanner(out).scan(inner);

        if (tail.find(kThinkOpen) != std::string_view::npos || tail.find(kThinkClose) != std::string_view::npos) {
            out.diagnostics.push_back({DiagnosticCode::ExtraThinkBlock, Severity::Error, "think"});
        }
        if (close != std::string_view::npos) {
            extract_answer(tail, out);
        } else {
            out.diagnostics.push_back({DiagnosticCode::MissingAnswer, Severity::Error, {}});
        }
    }

    out.format_valid = std::none_of(out.diagnostics.begin(), out.diagnostics.end(),
                                    [](const Diagnostic& d) { return d.severity == Severity::Error; });
    return out;
}

std::string render_trajectory(const ParsedTrajectory& t) {
    if (!t.format_valid) throw RenderError("cannot render a trajectory that is not format-valid");
    if (t.answer.empty() || trim(t.answer).size() != t.answer.size()) {
        throw RenderError("answer must be non-empty and trimmed");
    }
    if (!braces_balanced(t.answer)) throw RenderError("answer braces are unbalanced");
    if (contains_tag(t.think_text) || contains_tag(t.answer)) throw RenderError("text contains reserved tags");

    std::string out(kThinkOpen);
    std::size_t cursor = 0;
    for (const auto& f : t.foci) {
        if (f.position < cursor || f.position > t.think_text.size()) {
            throw RenderError("focus positions must be ordered and inside the think text");
        }
        if (trim(f.attribute).size() != f.attribute.size() || contains_tag(f.attribute)) {
            throw RenderError("focus attribute must be trimmed and tag-free");
        }
        out.append(t.think_text, cursor, f.position - cursor);
        out.append(kFocusOpen).append(to_string(f.dimension)).append(kFocusClose);
        out.append(kAttrOpen).append(f.attribute).append(kAttrClose);
        cursor = f.position;
    }
    out.append(t.think_text, cursor);
    out.append(kThinkClose).append(kBoxedOpen).append(t.answer).append("}");
    return out;
}

FormatReport validate_format(const ParsedTrajectory& t) {
    return {t.format_valid, t.diagnostics};
}

}  // namespace rolefocus
