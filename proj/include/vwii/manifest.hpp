#pragma once

// Corpus manifest: a line-oriented `key = value` document naming each video
// and recording where its features came from.
//
//   # comment
//   model = alexnet-fc7
//   sampling_interval = 1
//   video.0 = intro_clip
//   video.1 = match_highlights

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "vwii/binary_io.hpp"
#include "vwii/error.hpp"

namespace vwii {

struct Manifest {
    std::string model;
    double sampling_interval = 0.0;
    std::map<std::uint32_t, std::string> videos;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline std::string format_manifest(const Manifest& m) {
    std::ostringstream out;
    out.precision(17);
    out << "# vwii corpus manifest\n";
    out << "model = " << m.model << "\n";
    out << "sampling_interval = " << m.sampling_interval << "\n";
    for (const auto& [id, name] : m.videos) out << "video." << id << " = " << name << "\n";
    return out.str();
}

/// Errors report the 1-based line number as the offset.
inline Manifest parse_manifest(std::string_view text) {
    Manifest m;
    std::uint64_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        const auto raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw FormatError(FormatErrc::invalid_content, line_no, "expected `key = value`");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));

        if (key == "model") {
            m.model = std::string(value);
        } else if (key == "sampling_interval") {
            try {
                std::size_t used = 0;
                m.sampling_interval = std::stod(std::string(value), &used);
                if (used != value.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw FormatError(FormatErrc::invalid_content, line_no, "bad sampling_interval");
            }
        } else if (key.starts_with("video.")) {
            const auto id_text = key.substr(6);
            std::uint32_t id = 0;
            auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
            if (ec != std::errc{} || ptr != id_text.data() + id_text.size())
                throw FormatError(FormatErrc::invalid_content, line_no, "bad video id");
            if (value.empty())
                throw FormatError(FormatErrc::invalid_content, line_no, "empty video name");
            if (!m.videos.emplace(id, std::string(value)).second)
                throw FormatError(FormatErrc::invalid_content, line_no, "duplicate video id");
        } else {
            throw FormatError(FormatErrc::invalid_content, line_no, "unknown key `" + std::string(key) + "`");
        }
    }
    return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    return parse_manifest(io::read_file(path));
}

inline void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    io::write_file_atomic(path, format_manifest(m));
}

}  // namespace vwii
