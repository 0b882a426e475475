// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "streammem/feature_map.hpp"
#include "streammem/long_term_memory.hpp"
#include "streammem/retrieval.hpp"

namespace streammem {

/// Piecewise-stationary synthetic stream: scene s contributes scene_lengths[s] noisy copies of
/// its unit centroid.
struct SceneSpec {
    std::size_t num_scenes = 0;
    std::vector<std::size_t> scene_lengths;
    std::uint64_t centroid_seed = 0;
    double noise_sigma = 0.0;
    std::size_t dim = 0;

    /// Throws InvalidSpec.
    void validate() const;
    std::size_t total_frames() const noexcept;
};

struct SyntheticStream {
    std::vector<FeatureMap> frames;
    std::vector<std::size_t> labels;  ///< scene of each frame
    std::vector<std::vector<double>> centroids;
};

/// Centroids are normalised seeded Gaussians; every frame has P = 1 and
/// frame_index equal to its stream position.
SyntheticStream generate_stream(const SceneSpec& spec);

enum class Policy { Fifo, Uniform, RedundancyAware };

inline constexpr Policy kAllPolicies[] = {Policy::Fifo, Policy::Uniform, Policy::RedundancyAware};

std::string_view to_string(Policy policy) noexcept;
/// Accepts "fifo", "uniform", "redundancy_aware". Throws UnknownPolicy.
Policy parse_policy(std::string_view name);

struct PolicyConfig {
    LtmConfig ltm;
    std::size_t k = kDefaultTopK;
    /// Seeds the reservoir baseline.
    std::uint64_t seed = 0;
};

/// A long-term store under some eviction policy.
class PolicyStore {
public:
    virtual ~PolicyStore() = default;
    virtual EvictionReport offer(MemoryEntry entry) = 0;
    virtual std::vector<MemoryEntry> retained() const = 0;
    virtual std::size_t size() const = 0;
};

/// Keeps the newest `capacity` entries.
class FifoStore final : public PolicyStore {
public:
    FifoStore(std::size_t channels, std::size_t capacity);
    EvictionReport offer(MemoryEntry entry) override;
    std::vector<MemoryEntry> retained() const override;
    std::size_t size() const override {
        return m_entries.size();
    }

private:
    std::size_t m_channels;
    std::size_t m_capacity;
    std::vector<MemoryEntry> m_entries;  // ring, m_head is the oldest once full
    std::size_t m_head = 0;
    std::uint64_t m_counter = 0;
};

/// Single-pass reservoir sampling: offer t (0-based) replaces slot j ~ U{0..t} when j < capacity.
class ReservoirStore final : public PolicyStore {
public:
    ReservoirStore(std::size_t channels, std::size_t capacity, std::uint64_t seed);
    EvictionReport offer(MemoryEntry entry) override;
    std::vector<MemoryEntry> retained() const override {
        return m_entries;
    }
    std::size_t size() const override {
        return m_entries.size();
    }

private:
    std::size_t m_channels;
    std::size_t m_capacity;
    std::vector<MemoryEntry> m_entries;
    std::mt19937_64 m_rng;
    std::uint64_t m_counter = 0;
};

class RedundancyAwareStore final : public PolicyStore {
public:
    RedundancyAwareStore(std::size_t channels, const LtmConfig& config)
        : m_ltm(channels, config) {}
    EvictionReport offer(MemoryEntry entry) override {
        return m_ltm.offer(std::move(entry));
    }
    std::vector<MemoryEntry> retained() const override {
        return m_ltm.entries();
    }
    std::size_t size() const override {
        return m_ltm.size();
    }
    const LongTermMemory& ltm() const noexcept {
        return m_ltm;
    }

private:
    LongTermMemory m_ltm;
};

std::unique_ptr<PolicyStore> make_policy_store(Policy policy, std::size_t channels, const PolicyConfig& config);

struct StreamMetrics {
    /// Fraction of scenes with at least one retained entry; nullopt without labels.
    std::optional<double> scene_coverage;
    /// Mean pairwise (1 - cosine) over retained descriptors; 0 with fewer than two entries.
    double diversity = 0.0;
    /// Fraction of scenes whose centroid query retrieves an entry of that scene in its top k;
    /// nullopt without labels.
    std::optional<double> recall_at_k;
    /// Frames per second over the ingestion loop. Not deterministic.
    double ingest_throughput = 0.0;
    std::size_t frames_ingested = 0;
    std::size_t frames_skipped = 0;
    std::size_t retained = 0;
};

double scene_coverage(std::span<const MemoryEntry> retained,
                      std::span<const std::size_t> labels,
                      std::size_t num_scenes);
double diversity(std::span<const MemoryEntry> retained);
double recall_at_k(std::span<const MemoryEntry> retained,
                   std::span<const std::size_t> labels,
                   const std::vector<std::vector<double>>& centroids,
                   std::size_t k);

struct PolicyRun {
    StreamMetrics metrics;
    std::vector<EvictionReport> reports;
    std::vector<MemoryEntry> retained;
};

/// Streams `frames` through a store under `policy`. Frames whose pooled feature is degenerate are
/// skipped and counted. Labels and centroids may be empty (metrics that need them stay unset).
PolicyRun run_policy(std::span<const FeatureMap> frames,
                     std::span<const std::size_t> labels,
                     const std::vector<std::vector<double>>& centroids,
                     Policy policy,
                     const PolicyConfig& config);

StreamMetrics evaluate_policy(const SyntheticStream& stream, Policy policy, const PolicyConfig& config);

}  // namespace streammem
