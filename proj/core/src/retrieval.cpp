// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/retrieval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "streammem/error.hpp"

namespace streammem {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void check_query(std::span<const double> query, std::size_t dim) {
    STREAMMEM_CHECK(query.size() == dim,
                    DimensionMismatch,
                    "query has d=" + std::to_string(query.size()) + ", expected " + std::to_string(dim));
    for (double v : query) {
        STREAMMEM_CHECK(std::isfinite(v), NonFiniteValue, "query contains a non-finite value");
    }
}

}  // namespace

FusionParams FusionParams::identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    FusionParams p;
    p.w_q = Eigen::MatrixXd::Identity(d, d);
    p.w_k = Eigen::MatrixXd::Identity(d, d);
    p.w_v = Eigen::MatrixXd::Identity(d, d);
    p.scale = 1.0 / std::sqrt(static_cast<double>(dim));
    return p;
}

void FusionParams::validate() const {
    const auto d = w_q.rows();
    STREAMMEM_CHECK(d >= 1, InvalidArgument, "fusion params need d >= 1");
    for (const auto* m : {&w_q, &w_k, &w_v}) {
        STREAMMEM_CHECK(m->rows() == d && m->cols() == d, InvalidArgument, "fusion projections must all be d x d");
        STREAMMEM_CHECK(m->allFinite(), InvalidArgument, "fusion projections must be finite");
    }
    STREAMMEM_CHECK(std::isfinite(scale), InvalidArgument, "fusion scale must be finite");
}

std::vector<double> fuse_query(std::span<const double> query, const ShortTermMemory& stm, const FusionParams& params) {
    params.validate();
    check_query(query, params.dim());
    STREAMMEM_CHECK(stm.channels() == params.dim(),
                    DimensionMismatch,
                    "STM has D=" + std::to_string(stm.channels()) + ", fusion params have d=" +
                        std::to_string(params.dim()));

    std::vector<double> fused(query.begin(), query.end());
    if (stm.empty()) {
        return fused;
    }

    const auto n = static_cast<Eigen::Index>(stm.size());
    const auto d = static_cast<Eigen::Index>(params.dim());
    Eigen::MatrixXd keys(d, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        keys.col(j) = as_vector(stm[static_cast<std::size_t>(j)].descriptor.values());
    }
    const Eigen::VectorXd projected_query = params.w_q * as_vector(query);
    Eigen::VectorXd logits = ((params.w_k * keys).transpose() * projected_query) * params.scale;
    logits.array() -= logits.maxCoeff();
    Eigen::VectorXd weights = logits.array().exp();
    weights /= weights.sum();
    const Eigen::VectorXd attended = params.w_v * (keys * weights);

    for (Eigen::Index i = 0; i < d; ++i) {
        fused[static_cast<std::size_t>(i)] += attended(i);
    }
    return fused;
}

std::vector<double> score_ltm(std::span<const double> fused_query, const LongTermMemory& ltm) {
    check_query(fused_query, ltm.channels());
    STREAMMEM_CHECK(!ltm.empty(), EmptyMemory, "long-term memory is empty");
    const auto q = as_vector(fused_query);
    const double q_norm = q.norm();
    STREAMMEM_CHECK(q_norm >= kZeroNormThreshold, ZeroQuery, "fused query norm is below 1e-12");

    std::vector<double> scores(ltm.size());
    for (std::size_t i = 0; i < ltm.size(); ++i) {
        const auto r = as_vector(ltm[i].descriptor.values());
        scores[i] = q.dot(r) / (q_norm * r.norm());
    }
    return scores;
}

std::vector<RankedSlot> top_k(std::span<const double> scores, std::size_t k, const LongTermMemory& ltm) {
    STREAMMEM_CHECK(k >= 1, InvalidArgument, "k must be positive");
    STREAMMEM_CHECK(scores.size() == ltm.size(), DimensionMismatch, "one score per LTM slot is required");
    const std::size_t keep = std::min(k, scores.size());
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(),
                      order.begin() + static_cast<std::ptrdiff_t>(keep),
                      order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) {
                              return scores[a] > scores[b];
                          }
                          return ltm[a].ingest_order < ltm[b].ingest_order;
                      });
    std::vector<RankedSlot> ranked;
    ranked.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        ranked.push_back({order[i], scores[order[i]]});
    }
    return ranked;
}

RetrievalResult retrieve(std::span<const double> query,
                         const MemorySnapshot& snapshot,
                         const FusionParams& params,
                         std::size_t k) {
    RetrievalResult result;
    result.fused_query = fuse_query(query, snapshot.stm(), params);
    const auto& ltm = snapshot.ltm();
    if (!ltm.empty()) {
        const auto scores = score_ltm(result.fused_query, ltm);
        result.ranked = top_k(scores, k, ltm);
    } else {
        STREAMMEM_CHECK(k >= 1, InvalidArgument, "k must be positive");
    }
    result.evidence.reserve(snapshot.stm().size() + result.ranked.size());
    for (const auto& e : snapshot.stm().entries()) {
        result.evidence.push_back(e);
    }
    for (const auto& r : result.ranked) {
        result.evidence.push_back(ltm[r.slot]);
    }
    return result;
}

}  // namespace streammem
