// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/racl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "streammem/error.hpp"

namespace streammem {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

std::vector<double> normalize_or_throw(std::vector<double> v, const char* what) {
    const double n = norm(v);
    STREAMMEM_CHECK(n >= kZeroNormThreshold, ZeroVector, std::string(what) + " has norm below 1e-12");
    for (double& x : v) {
        x /= n;
    }
    return v;
}

std::vector<double> temporal_mean(const FrameStack& stack, std::size_t dim) {
    std::vector<double> mean(dim, 0.0);
    for (const auto& frame : stack) {
        for (std::size_t c = 0; c < dim; ++c) {
            mean[c] += frame[c];
        }
    }
    for (double& v : mean) {
        v /= static_cast<double>(stack.size());
    }
    return mean;
}

std::vector<double> pooled_mean(const std::vector<FrameStack>& stacks, std::size_t dim) {
    std::vector<double> mean(dim, 0.0);
    for (const auto& stack : stacks) {
        const auto m = temporal_mean(stack, dim);
        for (std::size_t c = 0; c < dim; ++c) {
            mean[c] += m[c];
        }
    }
    for (double& v : mean) {
        v /= static_cast<double>(stacks.size());
    }
    return mean;
}

void check_stacks(const std::vector<FrameStack>& stacks, std::size_t dim, const char* what) {
    for (const auto& stack : stacks) {
        STREAMMEM_CHECK(!stack.empty(), InvalidArgument, std::string(what) + " contains an empty frame stack");
        for (const auto& frame : stack) {
            STREAMMEM_CHECK(frame.size() == dim, DimensionMismatch, std::string(what) + " frame has wrong length");
            for (double v : frame) {
                STREAMMEM_CHECK(std::isfinite(v), NonFiniteValue, std::string(what) + " contains a non-finite value");
            }
        }
    }
}

// Cosine of (q, n) and its gradients with respect to both arguments, accumulated with weight w.
double cosine_with_grads(std::span<const double> q,
                         std::span<const double> n,
                         double w,
                         std::span<double> grad_q,
                         std::span<double> grad_n) {
    const double qn = norm(q);
    const double nn = norm(n);
    const double c = dot(q, n) / (qn * nn);
    if (w != 0.0) {
        for (std::size_t i = 0; i < q.size(); ++i) {
            grad_q[i] += w * (n[i] / (qn * nn) - c * q[i] / (qn * qn));
            grad_n[i] += w * (q[i] / (qn * nn) - c * n[i] / (nn * nn));
        }
    }
    return c;
}

}  // namespace

void RaclBatch::validate() const {
    const std::size_t b = queries.size();
    STREAMMEM_CHECK(b >= 1, InvalidArgument, "RACL batch needs at least one query");
    STREAMMEM_CHECK(retrieved.size() == b, InvalidArgument, "one retrieved stack per query is required");
    STREAMMEM_CHECK(std::isfinite(temperature) && temperature > 0.0, InvalidArgument, "temperature must be > 0");
    STREAMMEM_CHECK(num_shift_negatives >= 1, InvalidArgument, "at least one shift negative is required");
    const std::size_t d = dim();
    STREAMMEM_CHECK(d >= 1, InvalidArgument, "query dimension must be positive");
    for (const auto& q : queries) {
        STREAMMEM_CHECK(q.size() == d, DimensionMismatch, "queries have differing lengths");
        for (double v : q) {
            STREAMMEM_CHECK(std::isfinite(v), NonFiniteValue, "query contains a non-finite value");
        }
    }
    if (mode == NegativeMode::ComponentShift) {
        STREAMMEM_CHECK(num_shift_negatives < d, InvalidArgument, "component shifts need K_neg < d");
    } else {
        STREAMMEM_CHECK(num_shift_negatives < b, InvalidArgument, "in-batch shifts need K_neg < B");
    }
    check_stacks(retrieved, d, "retrieved");
    check_stacks(ltm_sample, d, "ltm_sample");
}

std::vector<double> cyclic_shift(std::span<const double> v, std::size_t k) {
    const std::size_t d = v.size();
    std::vector<double> out(d);
    for (std::size_t j = 0; j < d; ++j) {
        out[(j + k) % d] = v[j];
    }
    return out;
}

std::vector<double> positive_anchor(const RaclBatch& batch) {
    batch.validate();
    return normalize_or_throw(pooled_mean(batch.retrieved, batch.dim()), "positive anchor");
}

std::vector<std::vector<double>> sample_anchors(const RaclBatch& batch) {
    batch.validate();
    std::vector<std::vector<double>> anchors;
    anchors.reserve(batch.size());
    for (const auto& stack : batch.retrieved) {
        anchors.push_back(normalize_or_throw(temporal_mean(stack, batch.dim()), "sample anchor"));
    }
    return anchors;
}

std::optional<std::vector<double>> ltm_negative(const RaclBatch& batch) {
    if (batch.ltm_sample.empty()) {
        return std::nullopt;
    }
    return normalize_or_throw(pooled_mean(batch.ltm_sample, batch.dim()), "LTM negative");
}

std::vector<std::vector<double>> build_negatives(std::span<const double> anchor, const RaclBatch& batch) {
    batch.validate();
    STREAMMEM_CHECK(anchor.size() == batch.dim(), DimensionMismatch, "anchor length differs from d");
    STREAMMEM_CHECK(batch.num_shift_negatives < anchor.size(), InvalidArgument, "component shifts need K_neg < d");
    std::vector<std::vector<double>> negatives;
    for (std::size_t k = 1; k <= batch.num_shift_negatives; ++k) {
        negatives.push_back(cyclic_shift(anchor, k));
    }
    if (auto neg = ltm_negative(batch)) {
        negatives.push_back(std::move(*neg));
    }
    return negatives;
}

RaclProblem make_problem(const RaclBatch& batch) {
    batch.validate();
    RaclProblem problem;
    problem.queries = batch.queries;
    if (batch.mode == NegativeMode::ComponentShift) {
        problem.anchors.push_back(positive_anchor(batch));
    } else {
        problem.anchors = sample_anchors(batch);
    }
    problem.ltm_negative = ltm_negative(batch);
    problem.temperature = batch.temperature;
    problem.num_shift_negatives = batch.num_shift_negatives;
    problem.mode = batch.mode;
    return problem;
}

RaclOutput racl_objective(const RaclProblem& problem) {
    const std::size_t b = problem.queries.size();
    STREAMMEM_CHECK(b >= 1, InvalidArgument, "RACL needs at least one query");
    const std::size_t d = problem.queries.front().size();
    const std::size_t k_neg = problem.num_shift_negatives;
    const bool component = problem.mode == NegativeMode::ComponentShift;
    STREAMMEM_CHECK(problem.anchors.size() == (component ? 1 : b), InvalidArgument, "wrong number of anchors");
    STREAMMEM_CHECK(problem.temperature > 0.0, InvalidArgument, "temperature must be > 0");
    for (const auto& q : problem.queries) {
        STREAMMEM_CHECK(q.size() == d, DimensionMismatch, "queries have differing lengths");
        STREAMMEM_CHECK(norm(q) >= kZeroNormThreshold, ZeroVector, "query has norm below 1e-12");
    }
    for (const auto& a : problem.anchors) {
        STREAMMEM_CHECK(a.size() == d, DimensionMismatch, "anchor length differs from d");
        STREAMMEM_CHECK(norm(a) >= kZeroNormThreshold, ZeroVector, "anchor has norm below 1e-12");
    }

    const double inv_tau = 1.0 / problem.temperature;
    const double inv_b = 1.0 / static_cast<double>(b);

    RaclOutput out;
    out.per_sample_losses.resize(b);
    out.grad_queries.assign(b, std::vector<double>(d, 0.0));
    std::vector<std::vector<double>> grad_anchors(problem.anchors.size(), std::vector<double>(d, 0.0));

    // Shifted copies are shared by every sample in component mode.
    std::vector<std::vector<double>> shifts;
    if (component) {
        for (std::size_t k = 1; k <= k_neg; ++k) {
            shifts.push_back(cyclic_shift(problem.anchors.front(), k));
        }
    }

    std::vector<double> scratch(d);
    for (std::size_t i = 0; i < b; ++i) {
        const auto& q = problem.queries[i];
        const std::size_t pos_idx = component ? 0 : i;

        // Logits: [positive, shift negatives..., ltm negative].
        std::vector<std::span<const double>> keys;
        keys.emplace_back(problem.anchors[pos_idx]);
        for (std::size_t k = 1; k <= k_neg; ++k) {
            keys.emplace_back(component ? shifts[k - 1] : problem.anchors[(i + k) % b]);
        }
        if (problem.ltm_negative) {
            keys.emplace_back(*problem.ltm_negative);
        }

        std::vector<double> logits(keys.size());
        for (std::size_t j = 0; j < keys.size(); ++j) {
            logits[j] = dot(q, keys[j]) / (norm(q) * norm(keys[j])) * inv_tau;
        }
        const double peak = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (double l : logits) {
            denom += std::exp(l - peak);
        }
        const double lse = peak + std::log(denom);
        out.per_sample_losses[i] = lse - logits[0];

        // dL_i/dlogit_j = softmax_j - [j == 0]; chain through cosine / tau and the 1/B mean.
        for (std::size_t j = 0; j < keys.size(); ++j) {
            const double p = std::exp(logits[j] - lse);
            const double w = (p - (j == 0 ? 1.0 : 0.0)) * inv_tau * inv_b;
            std::fill(scratch.begin(), scratch.end(), 0.0);
            cosine_with_grads(q, keys[j], w, out.grad_queries[i], scratch);

            if (j == 0) {
                for (std::size_t c = 0; c < d; ++c) {
                    grad_anchors[pos_idx][c] += scratch[c];
                }
            } else if (j <= k_neg) {
                if (component) {
                    // n = shift(r, j): n[(c + j) mod d] = r[c].
                    for (std::size_t c = 0; c < d; ++c) {
                        grad_anchors[0][c] += scratch[(c + j) % d];
                    }
                } else {
                    auto& g = grad_anchors[(i + j) % b];
                    for (std::size_t c = 0; c < d; ++c) {
                        g[c] += scratch[c];
                    }
                }
            }
        }
    }

    out.loss = std::accumulate(out.per_sample_losses.begin(), out.per_sample_losses.end(), 0.0) * inv_b;
    if (component) {
        out.grad_anchor = std::move(grad_anchors.front());
    } else {
        out.grad_sample_anchors = std::move(grad_anchors);
    }
    return out;
}

RaclOutput racl_loss(const RaclBatch& batch) {
    return racl_objective(make_problem(batch));
}

std::vector<FrameStack> sample_ltm_stacks(const LongTermMemory& ltm, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> slots(ltm.size());
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    const std::size_t take = std::min(count, slots.size());
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, slots.size() - 1);
        std::swap(slots[i], slots[pick(rng)]);
    }
    std::vector<FrameStack> stacks;
    stacks.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto& feature = ltm[slots[i]].feature;
        FrameStack stack;
        for (std::size_t p = 0; p < feature.positions(); ++p) {
            const auto row = feature.row(p);
            stack.emplace_back(row.begin(), row.end());
        }
        stacks.push_back(std::move(stack));
    }
    return stacks;
}

RaclBatch make_seeded_batch(const RaclFixtureSpec& spec) {
    STREAMMEM_CHECK(spec.batch >= 1 && spec.dim >= 1, InvalidArgument, "fixture needs B >= 1 and d >= 1");
    STREAMMEM_CHECK(spec.frames_per_sample.empty() || spec.frames_per_sample.size() == spec.batch,
                    InvalidArgument,
                    "frames_per_sample must list one count per sample");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&] {
        std::vector<double> v(spec.dim);
        for (double& x : v) {
            x = gauss(rng);
        }
        return v;
    };

    RaclBatch batch;
    batch.temperature = spec.temperature;
    batch.num_shift_negatives = spec.num_shift_negatives;
    batch.mode = spec.mode;
    for (std::size_t i = 0; i < spec.batch; ++i) {
        batch.queries.push_back(draw());
    }
    for (std::size_t i = 0; i < spec.batch; ++i) {
        const std::size_t t = spec.frames_per_sample.empty() ? 3 : spec.frames_per_sample[i];
        STREAMMEM_CHECK(t >= 1, InvalidArgument, "every sample needs at least one frame");
        FrameStack stack;
        for (std::size_t f = 0; f < t; ++f) {
            stack.push_back(draw());
        }
        batch.retrieved.push_back(std::move(stack));
    }
    for (std::size_t j = 0; j < spec.ltm_samples; ++j) {
        FrameStack stack;
        for (std::size_t f = 0; f < spec.ltm_frames; ++f) {
            stack.push_back(draw());
        }
        batch.ltm_sample.push_back(std::move(stack));
    }
    batch.validate();
    return batch;
}

}  // namespace streammem
