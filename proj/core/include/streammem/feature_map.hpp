// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace streammem {

/// Norm below which a pooled feature or query is treated as degenerate.
inline constexpr double kZeroNormThreshold = 1e-12;

/**
 * @brief A frame's raw feature grid: P spatial positions by D channels, row-major
 *        (position-major, channel-minor). Values are held in f64; f32 input is widened.
 */
class FeatureMap {
public:
    FeatureMap() = default;

    /// Throws InvalidArgument on empty shape or size mismatch, NonFiniteValue on NaN/Inf.
    FeatureMap(std::size_t positions, std::size_t channels, std::vector<double> data, std::uint64_t frame_index = 0);

    static FeatureMap from_f32(std::size_t positions,
                               std::size_t channels,
                               std::span<const float> data,
                               std::uint64_t frame_index = 0);

    /// Convenience for tests and fixtures: one row per position.
    static FeatureMap from_rows(const std::vector<std::vector<double>>& rows, std::uint64_t frame_index = 0);

    std::size_t positions() const noexcept {
        return m_positions;
    }
    std::size_t channels() const noexcept {
        return m_channels;
    }
    std::uint64_t frame_index() const noexcept {
        return m_frame_index;
    }
    void set_frame_index(std::uint64_t index) noexcept {
        m_frame_index = index;
    }

    std::span<const double> data() const noexcept {
        return m_data;
    }
    std::span<const double> row(std::size_t position) const noexcept {
        return std::span<const double>(m_data).subspan(position * m_channels, m_channels);
    }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
    std::size_t m_positions = 0;
    std::size_t m_channels = 0;
    std::vector<double> m_data;
    std::uint64_t m_frame_index = 0;
};

/// D-dimensional unit-norm summary of a FeatureMap. Only constructible through
/// compute_descriptor() or from an explicitly normalised vector.
class Descriptor {
public:
    Descriptor() = default;

    /// Normalises `vec`; throws ZeroVector if its norm is below kZeroNormThreshold.
    static Descriptor normalized(std::vector<double> vec);

    std::span<const double> values() const noexcept {
        return m_vec;
    }
    std::size_t size() const noexcept {
        return m_vec.size();
    }
    double operator[](std::size_t i) const noexcept {
        return m_vec[i];
    }

    friend bool operator==(const Descriptor&, const Descriptor&) = default;

private:
    explicit Descriptor(std::vector<double> vec)
        : m_vec(std::move(vec)) {}

    std::vector<double> m_vec;
};

/// Global average pooling over positions followed by L2 normalisation.
/// Throws ZeroVector when the pooled mean has norm below kZeroNormThreshold.
Descriptor compute_descriptor(const FeatureMap& feature);

struct MemoryEntry {
    FeatureMap feature;
    Descriptor descriptor;
    std::uint64_t ingest_order = 0;

    std::size_t channels() const noexcept {
        return feature.channels();
    }

    /// Builds an entry whose descriptor is computed from `feature`.
    static MemoryEntry make(FeatureMap feature, std::uint64_t ingest_order);

    friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

}  // namespace streammem
