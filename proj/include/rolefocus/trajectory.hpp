#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rolefocus {

/// The closed set of cognitive focus dimensions a trajectory may declare.
enum class FocusDimension {
    Knowledge,
    Style,
    Worldview,
    Emotion,
    Empathetic,
    Engagement,
    HumanLike,
    Extension,
    Memory,
    Safety,
};

inline constexpr std::array<FocusDimension, 10> kAllFocusDimensions = {
    FocusDimension::Knowledge,  FocusDimension::Style,      FocusDimension::Worldview, FocusDimension::Emotion,
    FocusDimension::Empathetic, FocusDimension::Engagement, FocusDimension::HumanLike, FocusDimension::Extension,
    FocusDimension::Memory,     FocusDimension::Safety,
};

/// Canonical spelling, e.g. "Human_Like".
std::string_view to_string(FocusDimension d) noexcept;

/// Case-insensitive lookup; spaces, hyphens and underscores are interchangeable
/// and surrounding whitespace is ignored.
std::optional<FocusDimension> parse_focus_label(std::string_view label);

struct FocusDeclaration {
    FocusDimension dimension;
    std::string attribute;
    // Byte offset into ParsedTrajectory::think_text where the declaration sat.
    std::size_t position = 0;

    friend bool operator==(const FocusDeclaration&, const FocusDeclaration&) = default;
};

enum class DiagnosticCode {
    MissingThinkBlock,
    ExtraThinkBlock,
    UnclosedTag,
    StrayTag,
    UnknownFocusLabel,
    MissingAttr,
    MissingAnswer,
    AnswerNotBoxed,
};

enum class Severity { Warning, Error };

struct Diagnostic {
    DiagnosticCode code;
    Severity severity;
    std::string detail;  // tag name, offending label, ...

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

std::string_view to_string(DiagnosticCode c) noexcept;
std::string_view to_string(Severity s) noexcept;

/// A model output decomposed into reasoning, focus declarations and answer.
///
/// `think_text` is the reasoning prose of the think block with the focus
/// markup lifted out; each declaration records the offset at which it
/// appeared so the trace can be re-rendered.
struct ParsedTrajectory {
    std::string think_text;
    std::vector<FocusDeclaration> foci;
    std::string answer;
    bool answer_was_boxed = false;
    bool format_valid = false;
    std::vector<Diagnostic> diagnostics;
};

struct FormatReport {
    bool pass = false;
    std::vector<Diagnostic> diagnostics;
};

class RenderError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parses raw model output. Never fails on structural defects (they land in
/// diagnostics and clear format_valid); throws InvalidUtf8 on malformed input.
ParsedTrajectory parse_trajectory(std::string_view raw);

/// Canonical text for a valid trajectory. Throws RenderError when the
/// trajectory is not format-valid or a field would not survive re-parsing.
std::string render_trajectory(const ParsedTrajectory& t);

FormatReport validate_format(const ParsedTrajectory& t);

}  // namespace rolefocus
