// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/hierarchical_memory.hpp"

#include <string>

#include "streammem/error.hpp"

namespace streammem {

void MemoryConfig::validate() const {
    STREAMMEM_CHECK(stm_capacity >= 1, InvalidConfig, "STM capacity must be positive");
    ltm.validate();
}

HierarchicalMemory::HierarchicalMemory(std::size_t channels, MemoryConfig config)
    : m_stm(channels, config.stm_capacity),
      m_ltm(channels, config.ltm) {}

HierarchicalMemory::HierarchicalMemory(ShortTermMemory stm, LongTermMemory ltm)
    : m_stm(std::move(stm)),
      m_ltm(std::move(ltm)) {
    STREAMMEM_CHECK(m_stm.channels() == m_ltm.channels(),
                    DimensionMismatch,
                    "STM has D=" + std::to_string(m_stm.channels()) + ", LTM has D=" + std::to_string(m_ltm.channels()));
}

EvictionReport HierarchicalMemory::ingest(FeatureMap feature) {
    const std::uint64_t order = feature.frame_index();
    return ingest(MemoryEntry::make(std::move(feature), order));
}

EvictionReport HierarchicalMemory::ingest(MemoryEntry entry) {
    STREAMMEM_CHECK(entry.channels() == channels(),
                    DimensionMismatch,
                    "entry has D=" + std::to_string(entry.channels()) + ", memory has D=" + std::to_string(channels()));
    STREAMMEM_CHECK(m_stm.empty() || entry.ingest_order > m_stm.entries().back().ingest_order,
                    NonMonotonicIngestOrder,
                    "ingest order " + std::to_string(entry.ingest_order) + " is not newer than the last frame");
    m_stm.push(entry);
    return m_ltm.offer(std::move(entry));
}

MemorySnapshot HierarchicalMemory::snapshot() const {
    return MemorySnapshot(*this);
}

}  // namespace streammem
