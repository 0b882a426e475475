// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/long_term_memory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "streammem/error.hpp"

namespace streammem {

void LtmConfig::validate() const {
    STREAMMEM_CHECK(capacity >= 1, InvalidConfig, "LTM capacity must be positive");
    STREAMMEM_CHECK(update_freq >= 1, InvalidConfig, "update frequency must be positive");
    STREAMMEM_CHECK(std::isfinite(protection_ratio) && protection_ratio >= 0.0 && protection_ratio < 1.0,
                    InvalidConfig,
                    "protection ratio must lie in [0, 1)");
}

std::size_t protected_count(std::size_t slot_count, double protection_ratio) noexcept {
    if (slot_count == 0) {
        return 0;
    }
    // Slack absorbs decimal ratios that land a hair above an integer (0.1 * 30).
    const double raw = std::ceil(protection_ratio * static_cast<double>(slot_count) - 1e-9);
    return std::min(static_cast<std::size_t>(std::max(raw, 0.0)), slot_count);
}

LongTermMemory::LongTermMemory(std::size_t channels, LtmConfig config)
    : m_channels(channels),
      m_config(config) {
    STREAMMEM_CHECK(channels >= 1, InvalidArgument, "long-term memory needs D >= 1");
    m_config.validate();
    const auto cap = static_cast<Eigen::Index>(m_config.capacity);
    m_entries.reserve(m_config.capacity);
    m_descriptors = RowMatrix::Zero(cap, static_cast<Eigen::Index>(channels));
    m_sim = Eigen::MatrixXd::Zero(cap, cap);
    m_row_sums = Eigen::VectorXd::Zero(cap);
    m_scratch = Eigen::VectorXd::Zero(cap);
}

EvictionReport LongTermMemory::offer(MemoryEntry entry) {
    STREAMMEM_CHECK(entry.channels() == m_channels && entry.descriptor.size() == m_channels,
                    DimensionMismatch,
                    "entry has D=" + std::to_string(entry.channels()) + ", memory has D=" + std::to_string(m_channels));
    STREAMMEM_CHECK(!m_newest_order || entry.ingest_order > *m_newest_order,
                    NonMonotonicIngestOrder,
                    "ingest order " + std::to_string(entry.ingest_order) + " is not newer than every stored entry");

    ++m_frame_counter;
    m_newest_order = entry.ingest_order;
    EvictionReport report;
    report.frame_counter = m_frame_counter;
    report.ingest_order = entry.ingest_order;

    if (m_entries.size() < m_config.capacity) {
        const std::size_t slot = m_entries.size();
        m_entries.push_back(std::move(entry));
        write_slot(slot, true);
        report.slot = slot;
        return report;
    }

    if (m_frame_counter - m_last_refresh >= m_config.update_freq) {
        refresh();
        report.refreshed = true;
    }
    const std::size_t victim = *select_victim(SelfTerm::Include);
    report.evicted = true;
    report.evicted_ingest_order = m_entries[victim].ingest_order;
    report.slot = victim;
    m_entries[victim] = std::move(entry);
    write_slot(victim, false);
    return report;
}

void LongTermMemory::write_slot(std::size_t slot, bool appended) {
    const auto n = static_cast<Eigen::Index>(m_entries.size());
    const auto i = static_cast<Eigen::Index>(slot);
    const auto desc = m_entries[slot].descriptor.values();
    m_descriptors.row(i) = Eigen::Map<const Eigen::RowVectorXd>(desc.data(), static_cast<Eigen::Index>(desc.size()));

    auto fresh = m_scratch.head(n);
    fresh.noalias() = m_descriptors.topRows(n) * m_descriptors.row(i).transpose();

    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
            continue;
        }
        const double old = appended ? 0.0 : m_sim(j, i);
        m_row_sums(j) += fresh(j) - old;
        m_sim(j, i) = fresh(j);
        m_sim(i, j) = fresh(j);
    }
    m_sim(i, i) = fresh(i);
    m_row_sums(i) = fresh.sum();
}

void LongTermMemory::refresh() {
    const auto n = static_cast<Eigen::Index>(m_entries.size());
    if (n > 0) {
        auto block = m_sim.topLeftCorner(n, n);
        block.setZero();
        block.selfadjointView<Eigen::Lower>().rankUpdate(m_descriptors.topRows(n));
        for (Eigen::Index c = 1; c < n; ++c) {
            for (Eigen::Index r = 0; r < c; ++r) {
                block(r, c) = block(c, r);
            }
        }
        m_row_sums.head(n) = block.rowwise().sum();
    }
    m_last_refresh = m_frame_counter;
}

std::vector<double> LongTermMemory::redundancy_scores(SelfTerm self_term) const {
    const std::size_t n = m_entries.size();
    std::vector<double> scores(n);
    const double denom = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double sum = m_row_sums(ii);
        if (self_term == SelfTerm::Exclude) {
            sum -= m_sim(ii, ii);
        }
        scores[i] = sum / denom;
    }
    return scores;
}

std::vector<std::size_t> LongTermMemory::protected_set() const {
    return most_recent(protected_count(m_entries.size(), m_config.protection_ratio));
}

std::vector<std::size_t> LongTermMemory::most_recent(std::size_t count) const {
    const std::size_t n = m_entries.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::nth_element(order.begin(),
                     order.begin() + static_cast<std::ptrdiff_t>(count),
                     order.end(),
                     [this](std::size_t a, std::size_t b) {
                         return m_entries[a].ingest_order > m_entries[b].ingest_order;
                     });
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

std::optional<std::size_t> LongTermMemory::select_victim(SelfTerm self_term) const {
    const std::size_t n = m_entries.size();
    if (n == 0) {
        return std::nullopt;
    }
    // A lone slot (or a ratio close to 1 on a tiny memory) would shield everything; keep one candidate.
    std::vector<bool> shielded(n, false);
    for (std::size_t s : most_recent(std::min(protected_count(n, m_config.protection_ratio), n - 1))) {
        shielded[s] = true;
    }
    const std::vector<double> scores = redundancy_scores(self_term);

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i) {
        if (shielded[i]) {
            continue;
        }
        if (!best || scores[i] > scores[*best] ||
            (scores[i] == scores[*best] && m_entries[i].ingest_order < m_entries[*best].ingest_order)) {
            best = i;
        }
    }
    return best;
}

Eigen::MatrixXd LongTermMemory::similarity_matrix() const {
    const auto n = static_cast<Eigen::Index>(m_entries.size());
    return m_sim.topLeftCorner(n, n);
}

bool operator==(const LongTermMemory& a, const LongTermMemory& b) {
    if (a.m_channels != b.m_channels || a.m_config.capacity != b.m_config.capacity ||
        a.m_config.update_freq != b.m_config.update_freq ||
        a.m_config.protection_ratio != b.m_config.protection_ratio || a.m_entries != b.m_entries ||
        a.m_frame_counter != b.m_frame_counter || a.m_last_refresh != b.m_last_refresh) {
        return false;
    }
    const auto n = static_cast<Eigen::Index>(a.m_entries.size());
    return a.m_sim.topLeftCorner(n, n) == b.m_sim.topLeftCorner(n, n) &&
           a.m_row_sums.head(n) == b.m_row_sums.head(n);
}

}  // namespace streammem
