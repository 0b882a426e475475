// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/stream_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "streammem/error.hpp"

namespace streammem {

void SceneSpec::validate() const {
    STREAMMEM_CHECK(num_scenes >= 1, InvalidSpec, "num_scenes must be positive");
    STREAMMEM_CHECK(scene_lengths.size() == num_scenes,
                    InvalidSpec,
                    "scene_lengths has " + std::to_string(scene_lengths.size()) + " entries, expected " +
                        std::to_string(num_scenes));
    for (std::size_t len : scene_lengths) {
        STREAMMEM_CHECK(len >= 1, InvalidSpec, "every scene needs at least one frame");
    }
    STREAMMEM_CHECK(std::isfinite(noise_sigma) && noise_sigma >= 0.0, InvalidSpec, "noise_sigma must be >= 0");
    STREAMMEM_CHECK(dim >= 1, InvalidSpec, "dim must be positive");
}

std::size_t SceneSpec::total_frames() const noexcept {
    return std::accumulate(scene_lengths.begin(), scene_lengths.end(), std::size_t{0});
}

SyntheticStream generate_stream(const SceneSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.centroid_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SyntheticStream stream;
    for (std::size_t s = 0; s < spec.num_scenes; ++s) {
        std::vector<double> c(spec.dim);
        double sq = 0.0;
        do {
            sq = 0.0;
            for (double& x : c) {
                x = gauss(rng);
                sq += x * x;
            }
        } while (sq < 1e-24);
        const double n = std::sqrt(sq);
        for (double& x : c) {
            x /= n;
        }
        stream.centroids.push_back(std::move(c));
    }

    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    std::uint64_t index = 0;
    stream.frames.reserve(spec.total_frames());
    for (std::size_t s = 0; s < spec.num_scenes; ++s) {
        for (std::size_t f = 0; f < spec.scene_lengths[s]; ++f) {
            std::vector<double> v = stream.centroids[s];
            if (spec.noise_sigma > 0.0) {
                for (double& x : v) {
                    x += noise(rng);
                }
            }
            stream.frames.emplace_back(1, spec.dim, std::move(v), index++);
            stream.labels.push_back(s);
        }
    }
    return stream;
}

std::string_view to_string(Policy policy) noexcept {
    switch (policy) {
    case Policy::Fifo:
        return "fifo";
    case Policy::Uniform:
        return "uniform";
    case Policy::RedundancyAware:
        return "redundancy_aware";
    }
    return "unknown";
}

Policy parse_policy(std::string_view name) {
    for (Policy p : kAllPolicies) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw Error(ErrorCode::UnknownPolicy, "unknown policy '" + std::string(name) + "'");
}

FifoStore::FifoStore(std::size_t channels, std::size_t capacity)
    : m_channels(channels),
      m_capacity(capacity) {
    STREAMMEM_CHECK(capacity >= 1, InvalidConfig, "capacity must be positive");
    m_entries.reserve(capacity);
}

EvictionReport FifoStore::offer(MemoryEntry entry) {
    STREAMMEM_CHECK(entry.channels() == m_channels, DimensionMismatch, "entry dimension differs from store");
    EvictionReport report;
    report.frame_counter = ++m_counter;
    report.ingest_order = entry.ingest_order;
    if (m_entries.size() < m_capacity) {
        report.slot = m_entries.size();
        m_entries.push_back(std::move(entry));
        return report;
    }
    report.evicted = true;
    report.evicted_ingest_order = m_entries[m_head].ingest_order;
    report.slot = m_head;
    m_entries[m_head] = std::move(entry);
    m_head = (m_head + 1) % m_capacity;
    return report;
}

std::vector<MemoryEntry> FifoStore::retained() const {
    std::vector<MemoryEntry> out;
    out.reserve(m_entries.size());
    for (std::size_t i = 0; i < m_entries.size(); ++i) {
        out.push_back(m_entries[(m_head + i) % m_entries.size()]);
    }
    return out;
}

ReservoirStore::ReservoirStore(std::size_t channels, std::size_t capacity, std::uint64_t seed)
    : m_channels(channels),
      m_capacity(capacity),
      m_rng(seed) {
    STREAMMEM_CHECK(capacity >= 1, InvalidConfig, "capacity must be positive");
    m_entries.reserve(capacity);
}

EvictionReport ReservoirStore::offer(MemoryEntry entry) {
    STREAMMEM_CHECK(entry.channels() == m_channels, DimensionMismatch, "entry dimension differs from store");
    const std::uint64_t t = m_counter++;
    EvictionReport report;
    report.frame_counter = m_counter;
    report.ingest_order = entry.ingest_order;
    if (m_entries.size() < m_capacity) {
        report.slot = m_entries.size();
        m_entries.push_back(std::move(entry));
        return report;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, t);
    const std::uint64_t j = pick(m_rng);
    if (j < m_capacity) {
        report.evicted = true;
        report.evicted_ingest_order = m_entries[j].ingest_order;
        report.slot = static_cast<std::size_t>(j);
        m_entries[j] = std::move(entry);
    } else {
        report.admitted = false;
    }
    return report;
}

std::unique_ptr<PolicyStore> make_policy_store(Policy policy, std::size_t channels, const PolicyConfig& config) {
    config.ltm.validate();
    switch (policy) {
    case Policy::Fifo:
        return std::make_unique<FifoStore>(channels, config.ltm.capacity);
    case Policy::Uniform:
        return std::make_unique<ReservoirStore>(channels, config.ltm.capacity, config.seed);
    case Policy::RedundancyAware:
        return std::make_unique<RedundancyAwareStore>(channels, config.ltm);
    }
    throw Error(ErrorCode::UnknownPolicy, "unknown policy");
}

double scene_coverage(std::span<const MemoryEntry> retained,
                      std::span<const std::size_t> labels,
                      std::size_t num_scenes) {
    STREAMMEM_CHECK(num_scenes >= 1, InvalidArgument, "coverage needs at least one scene");
    std::vector<bool> seen(num_scenes, false);
    for (const auto& e : retained) {
        STREAMMEM_CHECK(e.ingest_order < labels.size(), InvalidArgument, "retained entry has no label");
        seen[labels[e.ingest_order]] = true;
    }
    const auto covered = std::count(seen.begin(), seen.end(), true);
    return static_cast<double>(covered) / static_cast<double>(num_scenes);
}

double diversity(std::span<const MemoryEntry> retained) {
    const std::size_t n = retained.size();
    if (n < 2) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = retained[i].descriptor.values();
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto b = retained[j].descriptor.values();
            double cos = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) {
                cos += a[c] * b[c];
            }
            total += 1.0 - cos;
        }
    }
    return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double recall_at_k(std::span<const MemoryEntry> retained,
                   std::span<const std::size_t> labels,
                   const std::vector<std::vector<double>>& centroids,
                   std::size_t k) {
    STREAMMEM_CHECK(!centroids.empty(), InvalidArgument, "recall needs scene centroids");
    STREAMMEM_CHECK(k >= 1, InvalidArgument, "k must be positive");
    if (retained.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    std::vector<std::size_t> order(retained.size());
    std::vector<double> scores(retained.size());
    for (std::size_t s = 0; s < centroids.size(); ++s) {
        const auto& q = centroids[s];
        for (std::size_t i = 0; i < retained.size(); ++i) {
            const auto r = retained[i].descriptor.values();
            double dot = 0.0;
            for (std::size_t c = 0; c < r.size(); ++c) {
                dot += q[c] * r[c];
            }
            scores[i] = dot;
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t keep = std::min(k, order.size());
        std::partial_sort(order.begin(),
                          order.begin() + static_cast<std::ptrdiff_t>(keep),
                          order.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (scores[a] != scores[b]) {
                                  return scores[a] > scores[b];
                              }
                              return retained[a].ingest_order < retained[b].ingest_order;
                          });
        for (std::size_t i = 0; i < keep; ++i) {
            if (labels[retained[order[i]].ingest_order] == s) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(centroids.size());
}

PolicyRun run_policy(std::span<const FeatureMap> frames,
                     std::span<const std::size_t> labels,
                     const std::vector<std::vector<double>>& centroids,
                     Policy policy,
                     const PolicyConfig& config) {
    PolicyRun run;
    if (!frames.empty()) {
        const std::size_t channels = frames.front().channels();
        auto store = make_policy_store(policy, channels, config);
        run.reports.reserve(frames.size());
        const auto start = std::chrono::steady_clock::now();
        for (const auto& frame : frames) {
            MemoryEntry entry;
            try {
                entry = MemoryEntry::make(frame, frame.frame_index());
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ZeroVector) {
                    throw;
                }
                ++run.metrics.frames_skipped;
                continue;
            }
            run.reports.push_back(store->offer(std::move(entry)));
            ++run.metrics.frames_ingested;
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        run.metrics.ingest_throughput =
            seconds > 0.0 ? static_cast<double>(run.metrics.frames_ingested) / seconds : 0.0;
        run.retained = store->retained();
    }

    run.metrics.retained = run.retained.size();
    run.metrics.diversity = diversity(run.retained);
    if (!labels.empty() && !centroids.empty()) {
        run.metrics.scene_coverage = scene_coverage(run.retained, labels, centroids.size());
        run.metrics.recall_at_k = recall_at_k(run.retained, labels, centroids, config.k);
    }
    return run;
}

StreamMetrics evaluate_policy(const SyntheticStream& stream, Policy policy, const PolicyConfig& config) {
    STREAMMEM_CHECK(!stream.frames.empty(), InvalidArgument, "stream is empty");
    return run_policy(stream.frames, stream.labels, stream.centroids, policy, config).metrics;
}

}  // namespace streammem
