// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>

#include "streammem/feature_map.hpp"
#include "streammem/long_term_memory.hpp"
#include "streammem/short_term_memory.hpp"

namespace streammem {

struct MemoryConfig {
    std::size_t stm_capacity = kDefaultStmCapacity;
    LtmConfig ltm;

    void validate() const;
};

class MemorySnapshot;

/// Short-term FIFO and long-term redundancy-aware store over a shared channel dimension.
/// Single writer: all mutation happens on one thread; readers take snapshots.
class HierarchicalMemory {
public:
    HierarchicalMemory(std::size_t channels, MemoryConfig config = {});

    /// Adopts existing tiers; both must agree on D.
    HierarchicalMemory(ShortTermMemory stm, LongTermMemory ltm);

    /// Pools `feature`, pushes it to the STM, and offers it to the LTM with
    /// ingest order = feature.frame_index(). Throws ZeroVector for blank features
    /// (nothing is stored), DimensionMismatch, NonMonotonicIngestOrder.
    EvictionReport ingest(FeatureMap feature);

    /// Inserts a prebuilt entry into both memories.
    EvictionReport ingest(MemoryEntry entry);

    const ShortTermMemory& stm() const noexcept {
        return m_stm;
    }
    const LongTermMemory& ltm() const noexcept {
        return m_ltm;
    }
    std::size_t channels() const noexcept {
        return m_ltm.channels();
    }

    /// Deep copy that later ingestion cannot alter.
    MemorySnapshot snapshot() const;

    friend bool operator==(const HierarchicalMemory&, const HierarchicalMemory&) = default;

private:
    ShortTermMemory m_stm;
    LongTermMemory m_ltm;
};

/// Immutable, cheaply copyable view of a HierarchicalMemory at one point in time.
/// Safe to share across threads.
class MemorySnapshot {
public:
    explicit MemorySnapshot(const HierarchicalMemory& memory)
        : m_state(std::make_shared<const HierarchicalMemory>(memory)) {}

    const HierarchicalMemory& memory() const noexcept {
        return *m_state;
    }
    const ShortTermMemory& stm() const noexcept {
        return m_state->stm();
    }
    const LongTermMemory& ltm() const noexcept {
        return m_state->ltm();
    }
    std::size_t channels() const noexcept {
        return m_state->channels();
    }

private:
    std::shared_ptr<const HierarchicalMemory> m_state;
};

}  // namespace streammem
