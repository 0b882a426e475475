// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/stream_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <system_error>

#include "streammem/error.hpp"

namespace streammem {

namespace {

template <typename T>
T load_le(const unsigned char* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
    }
    return value;
}

template <typename T>
void store_le(std::vector<unsigned char>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<unsigned char>((value >> (8 * i)) & 0xFF));
    }
}

}  // namespace

StreamReader::StreamReader(const std::filesystem::path& path) {
    std::error_code ec;
    const auto actual = std::filesystem::file_size(path, ec);
    STREAMMEM_CHECK(!ec, IoFailure, "cannot stat '" + path.string() + "': " + ec.message());
    m_in.open(path, std::ios::binary);
    STREAMMEM_CHECK(m_in.is_open(), IoFailure, "cannot open '" + path.string() + "'");

    std::array<unsigned char, kStreamHeaderBytes> raw{};
    m_in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    const auto got = static_cast<std::size_t>(m_in.gcount());
    STREAMMEM_CHECK(got >= 4 && std::memcmp(raw.data(), kStreamMagic.data(), 4) == 0,
                    BadMagic,
                    "'" + path.string() + "' does not start with WATF");
    STREAMMEM_CHECK(got == kStreamHeaderBytes, TruncatedPayload, "header is truncated");
    const auto version = load_le<std::uint16_t>(raw.data() + 4);
    STREAMMEM_CHECK(version == kStreamVersion, VersionUnsupported, "unsupported version " + std::to_string(version));
    m_header.dim = load_le<std::uint32_t>(raw.data() + 6);
    m_header.positions = load_le<std::uint32_t>(raw.data() + 10);
    m_header.count = load_le<std::uint64_t>(raw.data() + 14);

    if (m_header.count > 0) {
        STREAMMEM_CHECK(m_header.dim > 0 && m_header.positions > 0,
                        InvalidSpec,
                        "header declares frames with zero dim or positions");
        STREAMMEM_CHECK(m_header.count <= (std::numeric_limits<std::uint64_t>::max() - kStreamHeaderBytes) /
                                              m_header.frame_bytes(),
                        InvalidSpec,
                        "header frame count overflows");
    }
    const std::uint64_t expected = m_header.file_bytes();
    if (actual < expected) {
        const std::uint64_t whole = (actual - kStreamHeaderBytes) / m_header.frame_bytes();
        throw Error(ErrorCode::TruncatedPayload,
                    "payload truncated in frame " + std::to_string(whole) + " of " + std::to_string(m_header.count));
    }
    STREAMMEM_CHECK(actual == expected,
                    TrailingData,
                    std::to_string(actual - expected) + " bytes past the declared payload");
    m_buffer.resize(static_cast<std::size_t>(m_header.frame_bytes()));
}

std::optional<FeatureMap> StreamReader::next() {
    if (m_read == m_header.count) {
        return std::nullopt;
    }
    m_in.read(reinterpret_cast<char*>(m_buffer.data()), static_cast<std::streamsize>(m_buffer.size()));
    STREAMMEM_CHECK(static_cast<std::size_t>(m_in.gcount()) == m_buffer.size(),
                    TruncatedPayload,
                    "payload truncated in frame " + std::to_string(m_read));

    const std::size_t values = m_buffer.size() / 4;
    std::vector<double> data(values);
    for (std::size_t i = 0; i < values; ++i) {
        const float f = std::bit_cast<float>(load_le<std::uint32_t>(m_buffer.data() + 4 * i));
        STREAMMEM_CHECK(std::isfinite(f),
                        NonFiniteValue,
                        "non-finite value in frame " + std::to_string(m_read) + " at offset " + std::to_string(i));
        data[i] = static_cast<double>(f);
    }
    FeatureMap frame(m_header.positions, m_header.dim, std::move(data), m_read);
    ++m_read;
    return frame;
}

std::vector<FeatureMap> read_stream(const std::filesystem::path& path) {
    StreamReader reader(path);
    std::vector<FeatureMap> frames;
    frames.reserve(static_cast<std::size_t>(reader.header().count));
    while (auto frame = reader.next()) {
        frames.push_back(std::move(*frame));
    }
    return frames;
}

void write_stream(const std::filesystem::path& path,
                  std::span<const FeatureMap> frames,
                  std::optional<std::pair<std::uint32_t, std::uint32_t>> dim_positions) {
    StreamHeader header;
    if (!frames.empty()) {
        header.dim = static_cast<std::uint32_t>(frames.front().channels());
        header.positions = static_cast<std::uint32_t>(frames.front().positions());
        for (std::size_t i = 0; i < frames.size(); ++i) {
            STREAMMEM_CHECK(frames[i].channels() == header.dim && frames[i].positions() == header.positions,
                            HeterogeneousFrames,
                            "frame " + std::to_string(i) + " has a different shape from frame 0");
        }
        STREAMMEM_CHECK(!dim_positions || (dim_positions->first == header.dim &&
                                           dim_positions->second == header.positions),
                        HeterogeneousFrames,
                        "declared shape differs from the frames");
    } else if (dim_positions) {
        header.dim = dim_positions->first;
        header.positions = dim_positions->second;
    }
    header.count = frames.size();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        for (double v : frames[i].data()) {
            STREAMMEM_CHECK(std::isfinite(static_cast<float>(v)),
                            NonFiniteValue,
                            "value " + std::to_string(v) + " in frame " + std::to_string(i) + " overflows f32");
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    STREAMMEM_CHECK(out.is_open(), IoFailure, "cannot open '" + path.string() + "' for writing");

    std::vector<unsigned char> bytes;
    bytes.reserve(kStreamHeaderBytes);
    bytes.insert(bytes.end(), kStreamMagic.begin(), kStreamMagic.end());
    store_le(bytes, kStreamVersion);
    store_le(bytes, header.dim);
    store_le(bytes, header.positions);
    store_le(bytes, header.count);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

    for (const auto& frame : frames) {
        bytes.clear();
        for (double v : frame.data()) {
            store_le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    out.flush();
    STREAMMEM_CHECK(out.good(), IoFailure, "write to '" + path.string() + "' failed");
}

}  // namespace streammem
