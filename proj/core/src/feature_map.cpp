// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/feature_map.hpp"

#include <cmath>
#include <string>

#include "streammem/error.hpp"

namespace streammem {

namespace {

void check_finite(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        STREAMMEM_CHECK(std::isfinite(values[i]),
                        NonFiniteValue,
                        "feature value at offset " + std::to_string(i) + " is not finite");
    }
}

}  // namespace

FeatureMap::FeatureMap(std::size_t positions,
                       std::size_t channels,
                       std::vector<double> data,
                       std::uint64_t frame_index)
    : m_positions(positions),
      m_channels(channels),
      m_data(std::move(data)),
      m_frame_index(frame_index) {
    STREAMMEM_CHECK(positions >= 1 && channels >= 1, InvalidArgument, "feature map needs P >= 1 and D >= 1");
    STREAMMEM_CHECK(m_data.size() == positions * channels,
                    InvalidArgument,
                    "feature map data has " + std::to_string(m_data.size()) + " values, expected " +
                        std::to_string(positions * channels));
    check_finite(m_data);
}

FeatureMap FeatureMap::from_f32(std::size_t positions,
                                std::size_t channels,
                                std::span<const float> data,
                                std::uint64_t frame_index) {
    return FeatureMap(positions, channels, std::vector<double>(data.begin(), data.end()), frame_index);
}

FeatureMap FeatureMap::from_rows(const std::vector<std::vector<double>>& rows, std::uint64_t frame_index) {
    STREAMMEM_CHECK(!rows.empty(), InvalidArgument, "feature map needs at least one row");
    const std::size_t channels = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * channels);
    for (const auto& r : rows) {
        STREAMMEM_CHECK(r.size() == channels, InvalidArgument, "ragged feature rows");
        data.insert(data.end(), r.begin(), r.end());
    }
    return FeatureMap(rows.size(), channels, std::move(data), frame_index);
}

Descriptor Descriptor::normalized(std::vector<double> vec) {
    double sq = 0.0;
    for (double v : vec) {
        sq += v * v;
    }
    const double norm = std::sqrt(sq);
    STREAMMEM_CHECK(norm >= kZeroNormThreshold, ZeroVector, "vector norm is below 1e-12");
    for (double& v : vec) {
        v /= norm;
    }
    return Descriptor(std::move(vec));
}

Descriptor compute_descriptor(const FeatureMap& feature) {
    const std::size_t positions = feature.positions();
    const std::size_t channels = feature.channels();
    std::vector<double> pooled(channels, 0.0);
    for (std::size_t p = 0; p < positions; ++p) {
        const auto row = feature.row(p);
        for (std::size_t c = 0; c < channels; ++c) {
            pooled[c] += row[c];
        }
    }
    const double inv = 1.0 / static_cast<double>(positions);
    for (double& v : pooled) {
        v *= inv;
    }
    return Descriptor::normalized(std::move(pooled));
}

MemoryEntry MemoryEntry::make(FeatureMap feature, std::uint64_t ingest_order) {
    Descriptor descriptor = compute_descriptor(feature);
    return MemoryEntry{std::move(feature), std::move(descriptor), ingest_order};
}

}  // namespace streammem
