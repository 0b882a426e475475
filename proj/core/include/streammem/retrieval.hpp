// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "streammem/hierarchical_memory.hpp"

namespace streammem {

inline constexpr std::size_t kDefaultTopK = 32;

/// Projections of the single-head cross-attention that conditions a query on STM context.
struct FusionParams {
    Eigen::MatrixXd w_q;
    Eigen::MatrixXd w_k;
    Eigen::MatrixXd w_v;
    double scale = 1.0;

    /// Identity projections and scale 1/sqrt(d).
    static FusionParams identity(std::size_t dim);

    std::size_t dim() const noexcept {
        return static_cast<std::size_t>(w_q.rows());
    }
    /// Throws InvalidArgument on non-square, mismatched or non-finite parameters.
    void validate() const;
};

struct RankedSlot {
    std::size_t slot = 0;
    double score = 0.0;

    friend bool operator==(const RankedSlot&, const RankedSlot&) = default;
};

struct RetrievalResult {
    std::vector<double> fused_query;
    std::vector<RankedSlot> ranked;
    /// STM entries oldest first, then the retrieved LTM entries in ranked order.
    std::vector<MemoryEntry> evidence;
};

/// q + sum_j softmax_j(scale * (Wq q).(Wk k_j)) * (Wv k_j), keys k_j being the
/// STM descriptors. Returns q unchanged for an empty STM.
std::vector<double> fuse_query(std::span<const double> query, const ShortTermMemory& stm, const FusionParams& params);

/// Cosine similarity between `fused_query` and every LTM slot descriptor.
/// Throws ZeroQuery or EmptyMemory.
std::vector<double> score_ltm(std::span<const double> fused_query, const LongTermMemory& ltm);

/// The min(k, |slots|) best slots, descending score, equal scores oldest ingest order first.
std::vector<RankedSlot> top_k(std::span<const double> scores, std::size_t k, const LongTermMemory& ltm);

RetrievalResult retrieve(std::span<const double> query,
                         const MemorySnapshot& snapshot,
                         const FusionParams& params,
                         std::size_t k = kDefaultTopK);

}  // namespace streammem
