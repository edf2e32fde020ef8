#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rolefocus {

/// Raised when input text is not well-formed UTF-8.
class InvalidUtf8 : public std::runtime_error {
public:
    InvalidUtf8(std::size_t offset)
        : std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

namespace utf8 {

/// Byte offset of the first malformed sequence, or npos when `text` is valid.
std::size_t find_invalid(std::string_view text) noexcept;

inline bool is_valid(std::string_view text) noexcept { return find_invalid(text) == std::string_view::npos; }

/// Throws InvalidUtf8 when `text` is malformed.
void require_valid(std::string_view text);

/// Decodes valid UTF-8 into code points. Precondition: is_valid(text).
std::vector<char32_t> decode(std::string_view text);

void append(std::string& out, char32_t cp);

std::string encode(const std::vector<char32_t>& cps);

}  // namespace utf8
}  // namespace rolefocus
