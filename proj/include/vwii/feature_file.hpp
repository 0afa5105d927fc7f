#pragma once

// Per-frame feature records exchanged with the extractor.
//
// Layout (little-endian):
//   "CVW1"  u32 version (=1)  u32 dim  u64 record_count
//   record_count x { u32 video_id  u32 frame_index  f32 timestamp  dim x f32 }

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vwii/binary_io.hpp"
#include "vwii/error.hpp"
#include "vwii/feature_model.hpp"

namespace vwii {

inline constexpr std::string_view kFeatureMagic = "CVW1";
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderSize = 4 + 4 + 4 + 8;

struct FeatureRecord {
    std::uint32_t video_id = 0;
    std::uint32_t frame_index = 0;
    float timestamp = 0.0f;
    std::vector<float> values;

    FeatureVector to_vector() const { return FeatureVector(values.begin(), values.end()); }

    friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct FeatureFile {
    std::uint32_t dim = 0;
    std::vector<FeatureRecord> records;

    friend bool operator==(const FeatureFile&, const FeatureFile&) = default;
};

inline std::string encode_feature_file(const FeatureFile& f) {
    if (f.dim == 0) throw InvalidArgument("feature file: dim must be positive");
    io::ByteWriter w;
    w.put_bytes(kFeatureMagic);
    w.put_u32(kFeatureVersion);
    w.put_u32(f.dim);
    w.put_u64(f.records.size());
    for (const auto& r : f.records) {
        if (r.values.size() != f.dim)
            throw InvalidArgument("feature file: record has " + std::to_string(r.values.size()) +
                                  " values, expected " + std::to_string(f.dim));
        w.put_u32(r.video_id);
        w.put_u32(r.frame_index);
        w.put_f32(r.timestamp);
        for (float x : r.values) w.put_f32(x);
    }
    return std::move(w).take();
}

/// Strict decode: bad magic, unknown version, short or over-long payloads and
/// non-finite values are all rejected with the offending byte offset.
inline FeatureFile decode_feature_file(std::string_view bytes) {
    if (bytes.size() >= 4 && bytes.substr(0, 4) != kFeatureMagic)
        throw FormatError(FormatErrc::bad_magic, 0, "expected CVW1 magic");
    io::ByteReader r(bytes);
    r.get_bytes(4);
    const auto version = r.get_u32();
    if (version != kFeatureVersion)
        throw FormatError(FormatErrc::unsupported_version, 4,
                          "feature file version " + std::to_string(version));
    FeatureFile f;
    f.dim = r.get_u32();
    if (f.dim == 0) throw FormatError(FormatErrc::invalid_content, 8, "dim is zero");
    const auto count = r.get_u64();

    const std::uint64_t record_size = 12 + 4ull * f.dim;
    const std::uint64_t payload = bytes.size() - kFeatureHeaderSize;
    if (count > payload / record_size)
        throw FormatError(FormatErrc::truncated, bytes.size(),
                          "header declares " + std::to_string(count) + " records, file holds " +
                              std::to_string(payload / record_size));
    if (payload != count * record_size)
        throw FormatError(FormatErrc::invalid_content, kFeatureHeaderSize + count * record_size,
                          "trailing bytes after last record");

    f.records.resize(static_cast<std::size_t>(count));
    for (auto& rec : f.records) {
        const auto at = r.offset();
        rec.video_id = r.get_u32();
        rec.frame_index = r.get_u32();
        rec.timestamp = r.get_f32();
        if (!std::isfinite(rec.timestamp) || rec.timestamp < 0.0f)
            throw FormatError(FormatErrc::invalid_content, at + 8, "timestamp must be finite and >= 0");
        rec.values.resize(f.dim);
        for (auto& x : rec.values) {
            const auto vat = r.offset();
            x = r.get_f32();
            if (!std::isfinite(x)) throw FormatError(FormatErrc::invalid_content, vat, "non-finite feature value");
        }
    }
    return f;
}

inline void write_feature_file(const std::filesystem::path& path, const FeatureFile& f) {
    io::write_file_atomic(path, encode_feature_file(f));
}

inline FeatureFile read_feature_file(const std::filesystem::path& path) {
    return decode_feature_file(io::read_file(path));
}

}  // namespace vwii
