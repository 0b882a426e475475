// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <optional>

#include "streammem/feature_map.hpp"

namespace streammem {

inline constexpr std::size_t kDefaultStmCapacity = 16;

/// Fixed-capacity FIFO of the most recent entries, oldest first.
class ShortTermMemory {
public:
    ShortTermMemory(std::size_t channels, std::size_t capacity = kDefaultStmCapacity);

    /// Appends `entry`; when full, the single oldest entry is dropped and returned.
    /// Throws DimensionMismatch or NonMonotonicIngestOrder.
    std::optional<MemoryEntry> push(MemoryEntry entry);

    std::size_t capacity() const noexcept {
        return m_capacity;
    }
    std::size_t channels() const noexcept {
        return m_channels;
    }
    std::size_t size() const noexcept {
        return m_entries.size();
    }
    bool empty() const noexcept {
        return m_entries.empty();
    }
    const std::deque<MemoryEntry>& entries() const noexcept {
        return m_entries;
    }
    const MemoryEntry& operator[](std::size_t i) const {
        return m_entries[i];
    }

    friend bool operator==(const ShortTermMemory&, const ShortTermMemory&) = default;

private:
    std::size_t m_channels;
    std::size_t m_capacity;
    std::deque<MemoryEntry> m_entries;
};

}  // namespace streammem
