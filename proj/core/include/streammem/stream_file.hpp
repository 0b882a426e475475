// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <vector>

#include "streammem/feature_map.hpp"

namespace streammem {

// Layout (all little-endian):
//   char[4] magic "WATF" | u16 version | u32 dim | u32 positions | u64 count
//   count * positions * dim f32 values, frame-major, then position-major, then channel-major.
inline constexpr std::array<char, 4> kStreamMagic = {'W', 'A', 'T', 'F'};
inline constexpr std::uint16_t kStreamVersion = 1;
inline constexpr std::size_t kStreamHeaderBytes = 22;

struct StreamHeader {
    std::uint32_t dim = 0;
    std::uint32_t positions = 0;
    std::uint64_t count = 0;

    std::uint64_t frame_bytes() const noexcept {
        return std::uint64_t{4} * dim * positions;
    }
    std::uint64_t file_bytes() const noexcept {
        return kStreamHeaderBytes + count * frame_bytes();
    }
};

/// Frame-at-a-time reader. The header and overall file length are validated on open;
/// payload values are checked as frames are read.
class StreamReader {
public:
    /// Throws IoFailure, BadMagic, VersionUnsupported, TruncatedPayload, TrailingData, InvalidSpec.
    explicit StreamReader(const std::filesystem::path& path);

    const StreamHeader& header() const noexcept {
        return m_header;
    }

    /// Next frame with frame_index = its position in the file; nullopt at the end.
    /// Throws NonFiniteValue naming the offending frame.
    std::optional<FeatureMap> next();

    std::uint64_t frames_read() const noexcept {
        return m_read;
    }

private:
    std::ifstream m_in;
    StreamHeader m_header;
    std::uint64_t m_read = 0;
    std::vector<unsigned char> m_buffer;
};

std::vector<FeatureMap> read_stream(const std::filesystem::path& path);

/// Writes `frames` narrowed to f32. All frames must share P and D (HeterogeneousFrames otherwise).
/// An empty sequence writes a header with dim = positions = 0 unless a shape is given.
void write_stream(const std::filesystem::path& path,
                  std::span<const FeatureMap> frames,
                  std::optional<std::pair<std::uint32_t, std::uint32_t>> dim_positions = std::nullopt);

}  // namespace streammem
