#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vwii {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (dimension mismatch, k out of
/// range, non-finite input, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

enum class FormatErrc {
    io,
    bad_magic,
    unsupported_version,
    truncated,
    checksum_mismatch,
    invalid_content,
};

inline std::string_view to_string(FormatErrc code) {
    switch (code) {
    case FormatErrc::io: return "io";
    case FormatErrc::bad_magic: return "bad_magic";
    case FormatErrc::unsupported_version: return "unsupported_version";
    case FormatErrc::truncated: return "truncated";
    case FormatErrc::checksum_mismatch: return "checksum_mismatch";
    case FormatErrc::invalid_content: return "invalid_content";
    }
    return "unknown";
}

/// A persisted artifact (feature file, manifest, index) could not be decoded.
/// `offset()` is the byte offset (or line number for text formats) where the
/// problem was detected.
class FormatError : public Error {
public:
    FormatError(FormatErrc code, std::uint64_t offset, const std::string& what)
        : Error(std::string(to_string(code)) + " at offset " + std::to_string(offset) +
                ": " + what),
          code_(code),
          offset_(offset),
          detail_(what) {}

    FormatErrc code() const noexcept { return code_; }
    std::uint64_t offset() const noexcept { return offset_; }
    /// The message without the category and offset prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    FormatErrc code_;
    std::uint64_t offset_;
    std::string detail_;
};

}  // namespace vwii
