// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>

#include "oracle.hpp"
#include "test_util.hpp"

namespace streammem {
namespace {

RaclBatch single(std::vector<double> q, FrameStack retrieved, std::size_t k_neg, double tau = kDefaultTemperature) {
    RaclBatch b;
    b.queries = {std::move(q)};
    b.retrieved = {std::move(retrieved)};
    b.num_shift_negatives = k_neg;
    b.temperature = tau;
    return b;
}

RaclFixtureSpec canonical_spec(std::uint64_t seed = 13) {
    RaclFixtureSpec spec;
    spec.batch = 4;
    spec.dim = 8;
    spec.num_shift_negatives = 3;
    spec.ltm_samples = 2;
    spec.temperature = 0.07;
    spec.seed = seed;
    return spec;
}

double norm(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

TEST(CyclicShift, Definition) {
    const std::vector<double> r = {1, 0, 0};
    EXPECT_EQ(cyclic_shift(r, 1), (std::vector<double>{0, 1, 0}));
    EXPECT_EQ(cyclic_shift(r, 2), (std::vector<double>{0, 0, 1}));
    const std::vector<double> v = {1, 2, 3, 4, 5};
    EXPECT_EQ(cyclic_shift(v, 2), (std::vector<double>{4, 5, 1, 2, 3}));
}

TEST(CyclicShift, ClosureAndNorm) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng() % 20;
        const auto v = test::gaussian_vector(d, rng);
        EXPECT_EQ(cyclic_shift(v, d), v);
        EXPECT_EQ(cyclic_shift(v, 0), v);
        for (std::size_t k = 1; k < d; ++k) {
            ASSERT_NEAR(norm(cyclic_shift(v, k)), norm(v), 1e-12);
        }
    }
}

TEST(PositiveAnchor, SingleFrame) {
    const auto a = positive_anchor(single({1, 0}, {{3, 4}}, 1));
    EXPECT_NEAR(a[0], 0.6, 1e-15);
    EXPECT_NEAR(a[1], 0.8, 1e-15);
}

TEST(PositiveAnchor, Cancellation) {
    RaclBatch b;
    b.queries = {{1, 0}, {0, 1}};
    b.retrieved = {{{1, 0}}, {{-1, 0}}};
    b.num_shift_negatives = 1;
    EXPECT_STREAMMEM_ERROR(positive_anchor(b), ZeroVector);
}

TEST(PositiveAnchor, MatchesNestedMeans) {
    RaclFixtureSpec spec = canonical_spec(21);
    spec.frames_per_sample = {1, 2, 5, 3};
    spec.ltm_samples = 0;
    const auto batch = make_seeded_batch(spec);
    const auto ref = oracle::racl(batch);
    const auto got = positive_anchor(batch);
    for (std::size_t c = 0; c < spec.dim; ++c) {
        EXPECT_NEAR(got[c], ref.anchors[0][c], 1e-12);
    }
}

TEST(BuildNegatives, ShiftsOnly) {
    const auto batch = single({1, 1, 1}, {{1, 0, 0}}, 2);
    const auto negs = build_negatives(std::vector<double>{1, 0, 0}, batch);
    ASSERT_EQ(negs.size(), 2u);
    EXPECT_EQ(negs[0], (std::vector<double>{0, 1, 0}));
    EXPECT_EQ(negs[1], (std::vector<double>{0, 0, 1}));
}

TEST(BuildNegatives, WithLtmSample) {
    RaclFixtureSpec spec = canonical_spec(8);
    spec.ltm_samples = 4;
    const auto batch = make_seeded_batch(spec);
    const auto anchor = positive_anchor(batch);
    const auto negs = build_negatives(anchor, batch);
    ASSERT_EQ(negs.size(), 4u);
    const auto ref = oracle::racl(batch);
    for (std::size_t k = 1; k <= 3; ++k) {
        for (std::size_t c = 0; c < 8; ++c) {
            // Component c moves to position c + k.
            EXPECT_EQ(negs[k - 1][(c + k) % 8], anchor[c]);
        }
        EXPECT_NEAR(norm(negs[k - 1]), 1.0, 1e-12);
    }
    ASSERT_TRUE(ref.ltm_negative);
    for (std::size_t c = 0; c < 8; ++c) {
        EXPECT_NEAR(negs[3][c], (*ref.ltm_negative)[c], 1e-12);
    }
}

TEST(BuildNegatives, RequiresShiftBelowDim) {
    const auto batch = single({1, 1}, {{1, 0}}, 1);
    RaclBatch bad = batch;
    bad.num_shift_negatives = 2;
    EXPECT_STREAMMEM_ERROR(build_negatives(std::vector<double>{1, 0}, bad), InvalidArgument);
    EXPECT_STREAMMEM_ERROR(racl_loss(bad), InvalidArgument);
}

TEST(RaclLoss, SymmetricIsLn2) {
    const auto out = racl_loss(single({1, 1}, {{1, 0}}, 1));
    EXPECT_NEAR(out.loss, std::log(2.0), 1e-12);
    EXPECT_NEAR(oracle::racl(single({1, 1}, {{1, 0}}, 1)).loss, std::log(2.0), 1e-12);
}

TEST(RaclLoss, CollinearClosedForm) {
    const auto batch = single({1, 0}, {{2, 0}}, 1, 0.07);
    const double expected = std::log1p(std::exp(-1.0 / 0.07));
    EXPECT_NEAR(racl_loss(batch).loss, expected, 1e-9);
    EXPECT_NEAR(expected, 6.2e-7, 1e-8);
    EXPECT_NEAR(oracle::racl(batch).loss, expected, 1e-9);
}

TEST(RaclLoss, MeanOfPerSample) {
    const auto out = racl_loss(make_seeded_batch(canonical_spec()));
    ASSERT_EQ(out.per_sample_losses.size(), 4u);
    const double mean = std::accumulate(out.per_sample_losses.begin(), out.per_sample_losses.end(), 0.0) / 4.0;
    EXPECT_NEAR(out.loss, mean, 1e-15);
}

TEST(RaclLoss, CanonicalBatchAgainstReference) {
    const auto batch = make_seeded_batch(canonical_spec());
    const auto got = racl_loss(batch);
    const auto ref = oracle::racl(batch);
    EXPECT_NEAR(got.loss, ref.loss, 1e-12);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(got.per_sample_losses[i], ref.per_sample_losses[i], 1e-12);
        EXPECT_LT(oracle::max_relative_error(got.grad_queries[i], ref.grad_queries[i]), 1e-6);
    }
    EXPECT_LT(oracle::max_relative_error(got.grad_anchor, ref.grad_anchor), 1e-6);
}

TEST(RaclLoss, GradientsAcrossSeeds) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto batch = make_seeded_batch(canonical_spec(seed));
        const auto got = racl_loss(batch);
        const auto ref = oracle::racl(batch);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            ASSERT_LT(oracle::max_relative_error(got.grad_queries[i], ref.grad_queries[i]), 1e-6) << "seed " << seed;
        }
        ASSERT_LT(oracle::max_relative_error(got.grad_anchor, ref.grad_anchor), 1e-6) << "seed " << seed;
    }
}

TEST(RaclLoss, InBatchModeGradients) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        RaclFixtureSpec spec = canonical_spec(seed);
        spec.mode = NegativeMode::InBatchShift;
        const auto batch = make_seeded_batch(spec);
        const auto got = racl_loss(batch);
        const auto ref = oracle::racl(batch);
        ASSERT_NEAR(got.loss, ref.loss, 1e-12);
        ASSERT_EQ(got.grad_sample_anchors.size(), 4u);
        for (std::size_t i = 0; i < 4; ++i) {
            ASSERT_LT(oracle::max_relative_error(got.grad_queries[i], ref.grad_queries[i]), 1e-6);
            ASSERT_LT(oracle::max_relative_error(got.grad_sample_anchors[i], ref.grad_sample_anchors[i]), 1e-6);
        }
    }
    RaclFixtureSpec bad = canonical_spec();
    bad.mode = NegativeMode::InBatchShift;
    bad.num_shift_negatives = 4;
    EXPECT_STREAMMEM_ERROR(racl_loss(make_seeded_batch(bad)), InvalidArgument);
}

TEST(RaclLoss, StableAtLowTemperature) {
    auto batch = make_seeded_batch(canonical_spec());
    batch.temperature = 0.01;
    const auto out = racl_loss(batch);
    EXPECT_TRUE(std::isfinite(out.loss));
    for (const auto& g : out.grad_queries) {
        for (double x : g) {
            EXPECT_TRUE(std::isfinite(x));
        }
    }
    batch.temperature = 1e-4;
    EXPECT_TRUE(std::isfinite(racl_loss(batch).loss));
    EXPECT_THROW(oracle::racl(batch), std::invalid_argument);
}

TEST(RaclLoss, SeparatedPositivePrefersLowTemperature) {
    std::mt19937_64 rng(15);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        RaclBatch batch;
        batch.num_shift_negatives = 3;
        for (int i = 0; i < 4; ++i) {
            auto frame = test::unit_vector(8, rng);
            batch.retrieved.push_back({frame});
            batch.queries.push_back(frame);
        }
        const auto anchor = positive_anchor(batch);
        batch.queries.clear();
        for (int i = 0; i < 4; ++i) {
            auto q = anchor;
            for (auto& x : q) {
                x += 0.05 * test::gaussian_vector(1, rng)[0];
            }
            batch.queries.push_back(q);
        }
        // Fixture geometry: every positive logit beats every negative logit.
        bool separated = true;
        for (const auto& q : batch.queries) {
            const double pos = oracle::cosine(q, anchor);
            for (const auto& n : build_negatives(anchor, batch)) {
                separated = separated && pos > oracle::cosine(q, n);
            }
        }
        if (!separated) {
            continue;
        }
        auto hot = batch;
        hot.temperature = 0.07;
        auto cold = batch;
        cold.temperature = 0.01;
        ASSERT_LT(racl_loss(cold).loss, racl_loss(hot).loss);
        ++checked;
    }
    EXPECT_GT(checked, 25);
}

TEST(RaclLoss, NonNegative) {
    std::mt19937_64 rng(16);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RaclFixtureSpec spec = canonical_spec(seed);
        spec.batch = 1 + rng() % 6;
        spec.dim = 2 + rng() % 10;
        spec.num_shift_negatives = 1 + rng() % (spec.dim - 1);
        spec.ltm_samples = rng() % 3;
        spec.temperature = 0.01 + 0.5 * static_cast<double>(rng() % 100) / 100.0;
        const auto out = racl_loss(make_seeded_batch(spec));
        ASSERT_GE(out.loss, 0.0);
        for (double l : out.per_sample_losses) {
            ASSERT_GE(l, 0.0);
        }
    }
}

TEST(RaclLoss, Errors) {
    EXPECT_STREAMMEM_ERROR(racl_loss(single({0, 0}, {{1, 0}}, 1)), ZeroVector);
    auto b = single({1, 0}, {{1, 0}}, 1);
    b.temperature = 0.0;
    EXPECT_STREAMMEM_ERROR(racl_loss(b), InvalidArgument);
    b = single({1, 0}, {}, 1);
    EXPECT_STREAMMEM_ERROR(racl_loss(b), InvalidArgument);
    b = single({1, 0}, {{1, 0, 0}}, 1);
    EXPECT_STREAMMEM_ERROR(racl_loss(b), DimensionMismatch);
}

TEST(SampleLtmStacks, DeterministicDistinctSlots) {
    std::mt19937_64 rng(3);
    LongTermMemory ltm(4, LtmConfig{20, 4, 0.1});
    for (std::uint64_t i = 0; i < 50; ++i) {
        ltm.offer(MemoryEntry::make(test::random_feature(2, 4, rng, i), i));
    }
    const auto a = sample_ltm_stacks(ltm, 8, 1);
    const auto b = sample_ltm_stacks(ltm, 8, 1);
    ASSERT_EQ(a.size(), 8u);
    EXPECT_EQ(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].size(), 2u);
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            EXPECT_NE(a[i], a[j]);
        }
    }
    EXPECT_EQ(sample_ltm_stacks(ltm, 100, 2).size(), 20u);
}

}  // namespace
}  // namespace streammem
