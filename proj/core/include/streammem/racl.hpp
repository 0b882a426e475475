// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "streammem/long_term_memory.hpp"

namespace streammem {

inline constexpr double kDefaultTemperature = 0.07;
inline constexpr std::size_t kDefaultShiftNegatives = 4;
inline constexpr std::size_t kDefaultLtmSampleSize = 8;

/// T frame feature vectors of one sample, each of length d.
using FrameStack = std::vector<std::vector<double>>;

/// How the shifted negatives are formed.
enum class NegativeMode {
    /// One batch-pooled anchor r; negatives are cyclic shifts of r's components by 1..K.
    ComponentShift,
    /// One anchor per sample r_i; negatives of sample i are r_{(i+k) mod B}, k = 1..K.
    InBatchShift,
};

struct RaclBatch {
    std::vector<std::vector<double>> queries;
    std::vector<FrameStack> retrieved;
    /// Stacks sampled from long-term memory; empty means no LTM negative.
    std::vector<FrameStack> ltm_sample;
    double temperature = kDefaultTemperature;
    std::size_t num_shift_negatives = kDefaultShiftNegatives;
    NegativeMode mode = NegativeMode::ComponentShift;

    std::size_t size() const noexcept {
        return queries.size();
    }
    std::size_t dim() const noexcept {
        return queries.empty() ? 0 : queries.front().size();
    }
    /// Throws InvalidArgument / DimensionMismatch / NonFiniteValue.
    void validate() const;
};

struct RaclOutput {
    double loss = 0.0;
    std::vector<double> per_sample_losses;
    std::vector<std::vector<double>> grad_queries;
    /// d(loss)/d(anchor) in ComponentShift mode, shifts differentiated through; empty otherwise.
    std::vector<double> grad_anchor;
    /// d(loss)/d(r_i) in InBatchShift mode; empty otherwise.
    std::vector<std::vector<double>> grad_sample_anchors;
};

/// Loss inputs after pooling: the objective is differentiated with respect to these.
struct RaclProblem {
    std::vector<std::vector<double>> queries;
    /// One anchor (ComponentShift) or one per sample (InBatchShift).
    std::vector<std::vector<double>> anchors;
    std::optional<std::vector<double>> ltm_negative;
    double temperature = kDefaultTemperature;
    std::size_t num_shift_negatives = kDefaultShiftNegatives;
    NegativeMode mode = NegativeMode::ComponentShift;
};

/// out[(j + k) mod d] = v[j].
std::vector<double> cyclic_shift(std::span<const double> v, std::size_t k);

/// normalize(mean_i mean_t F_i[t]). Throws ZeroVector.
std::vector<double> positive_anchor(const RaclBatch& batch);

/// normalize(mean_i mean_t F_i[t]) for each sample separately.
std::vector<std::vector<double>> sample_anchors(const RaclBatch& batch);

/// normalize(mean_j mean_t ltm_sample[j][t]); nullopt without an LTM sample.
std::optional<std::vector<double>> ltm_negative(const RaclBatch& batch);

/// Cyclic shifts of `anchor` by 1..K, followed by the pooled LTM negative when present.
std::vector<std::vector<double>> build_negatives(std::span<const double> anchor, const RaclBatch& batch);

RaclProblem make_problem(const RaclBatch& batch);

/// InfoNCE over temperature-scaled cosines, log-sum-exp stabilised, with analytic gradients.
RaclOutput racl_objective(const RaclProblem& problem);

RaclOutput racl_loss(const RaclBatch& batch);

/// Seeded uniform sample (without replacement) of `count` LTM entries, each position row a frame.
std::vector<FrameStack> sample_ltm_stacks(const LongTermMemory& ltm, std::size_t count, std::uint64_t seed);

struct RaclFixtureSpec {
    std::size_t batch = 4;
    /// Frames per sample; empty means 3 frames for every sample.
    std::vector<std::size_t> frames_per_sample;
    std::size_t dim = 8;
    std::size_t num_shift_negatives = 3;
    std::size_t ltm_samples = 2;
    std::size_t ltm_frames = 3;
    double temperature = kDefaultTemperature;
    std::uint64_t seed = 13;
    NegativeMode mode = NegativeMode::ComponentShift;
};

/// Gaussian queries and frame features drawn from `spec.seed`.
RaclBatch make_seeded_batch(const RaclFixtureSpec& spec);

}  // namespace streammem
