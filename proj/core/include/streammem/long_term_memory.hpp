// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "streammem/feature_map.hpp"

namespace streammem {

inline constexpr std::size_t kDefaultLtmCapacity = 768;
inline constexpr std::size_t kDefaultUpdateFreq = 64;
inline constexpr double kDefaultProtectionRatio = 0.1;

struct LtmConfig {
    std::size_t capacity = kDefaultLtmCapacity;
    /// Offers between full similarity recomputes. 1 disables staleness entirely.
    std::size_t update_freq = kDefaultUpdateFreq;
    /// Fraction of the most recent slots exempt from eviction, in [0, 1).
    double protection_ratio = kDefaultProtectionRatio;

    void validate() const;
};

/// Whether redundancy scores include each slot's self-similarity S_ii.
enum class SelfTerm { Include, Exclude };

/// Outcome of a single LongTermMemory::offer().
struct EvictionReport {
    std::uint64_t frame_counter = 0;  ///< C after this offer
    std::uint64_t ingest_order = 0;   ///< ingest order of the offered entry
    /// False only for policies that may discard the offered entry (reservoir baseline).
    bool admitted = true;
    bool evicted = false;
    std::optional<std::uint64_t> evicted_ingest_order;
    /// Slot the offered entry now occupies (i* on eviction, the appended index otherwise).
    std::optional<std::size_t> slot;
    bool refreshed = false;

    friend bool operator==(const EvictionReport&, const EvictionReport&) = default;
};

/// Number of protected slots for `slot_count` entries: ceil(ratio * slot_count). Eviction shields
/// at most slot_count - 1 of them so that one slot stays evictable.
std::size_t protected_count(std::size_t slot_count, double protection_ratio) noexcept;

/**
 * @brief Fixed-capacity store governed by redundancy-aware eviction.
 *
 * Keeps a cached cosine-similarity matrix between slot descriptors. Each offer rewrites the row and
 * column of the slot it fills; every `update_freq` offers at capacity the whole matrix is rebuilt
 * from the descriptors before the eviction decision. Redundancy scores are row means of the cached
 * matrix, maintained as running row sums that are re-accumulated on every full rebuild.
 *
 * When full, the slot with the highest redundancy score outside the protected (most recent) set is
 * replaced; equal scores go to the oldest ingest order.
 */
class LongTermMemory {
public:
    explicit LongTermMemory(std::size_t channels, LtmConfig config = {});

    /// Throws DimensionMismatch or NonMonotonicIngestOrder; the memory is unchanged on error.
    EvictionReport offer(MemoryEntry entry);

    /// Per-slot mean of the cached similarity row, denominator |slots|.
    std::vector<double> redundancy_scores(SelfTerm self_term = SelfTerm::Include) const;

    /// Slot indices (ascending) of the most recent protected_count() entries.
    std::vector<std::size_t> protected_set() const;

    /// The slot that the next eviction would replace given the current cache; nullopt when empty.
    std::optional<std::size_t> select_victim(SelfTerm self_term = SelfTerm::Include) const;

    /// Rebuilds the similarity cache from the slot descriptors and sets L <- C.
    void refresh();

    std::size_t size() const noexcept {
        return m_entries.size();
    }
    bool empty() const noexcept {
        return m_entries.empty();
    }
    std::size_t channels() const noexcept {
        return m_channels;
    }
    const LtmConfig& config() const noexcept {
        return m_config;
    }
    std::size_t capacity() const noexcept {
        return m_config.capacity;
    }
    std::uint64_t frame_counter() const noexcept {
        return m_frame_counter;
    }
    std::uint64_t last_refresh() const noexcept {
        return m_last_refresh;
    }

    const std::vector<MemoryEntry>& entries() const noexcept {
        return m_entries;
    }
    const MemoryEntry& operator[](std::size_t slot) const {
        return m_entries[slot];
    }

    double similarity(std::size_t i, std::size_t j) const {
        return m_sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    /// Copy of the |slots| x |slots| cached similarity matrix.
    Eigen::MatrixXd similarity_matrix() const;

    friend bool operator==(const LongTermMemory& a, const LongTermMemory& b);

private:
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    void write_slot(std::size_t slot, bool appended);
    std::vector<std::size_t> most_recent(std::size_t count) const;

    std::size_t m_channels;
    LtmConfig m_config;
    std::vector<MemoryEntry> m_entries;
    RowMatrix m_descriptors;  // capacity x D, first size() rows live
    Eigen::MatrixXd m_sim;    // capacity x capacity, leading size() block live
    Eigen::VectorXd m_row_sums;
    Eigen::VectorXd m_scratch;
    std::uint64_t m_frame_counter = 0;
    std::uint64_t m_last_refresh = 0;
    // The newest offer is always stored, so this is also the stored maximum.
    std::optional<std::uint64_t> m_newest_order;
};

}  // namespace streammem
