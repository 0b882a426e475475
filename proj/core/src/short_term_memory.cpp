// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/short_term_memory.hpp"

#include <string>

#include "streammem/error.hpp"

namespace streammem {

ShortTermMemory::ShortTermMemory(std::size_t channels, std::size_t capacity)
    : m_channels(channels),
      m_capacity(capacity) {
    STREAMMEM_CHECK(channels >= 1, InvalidArgument, "short-term memory needs D >= 1");
    STREAMMEM_CHECK(capacity >= 1, InvalidArgument, "short-term memory capacity must be positive");
}

std::optional<MemoryEntry> ShortTermMemory::push(MemoryEntry entry) {
    STREAMMEM_CHECK(entry.channels() == m_channels,
                    DimensionMismatch,
                    "entry has D=" + std::to_string(entry.channels()) + ", memory has D=" + std::to_string(m_channels));
    STREAMMEM_CHECK(m_entries.empty() || entry.ingest_order > m_entries.back().ingest_order,
                    NonMonotonicIngestOrder,
                    "ingest order " + std::to_string(entry.ingest_order) + " is not newer than the last entry");
    m_entries.push_back(std::move(entry));
    if (m_entries.size() > m_capacity) {
        MemoryEntry dropped = std::move(m_entries.front());
        m_entries.pop_front();
        return dropped;
    }
    return std::nullopt;
}

}  // namespace streammem
