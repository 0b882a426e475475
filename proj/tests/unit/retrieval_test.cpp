// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "oracle.hpp"
#include "test_util.hpp"

namespace streammem {
namespace {

LongTermMemory ltm_of(const std::vector<std::vector<double>>& descs, std::size_t capacity = 0) {
    LongTermMemory ltm(descs.front().size(), LtmConfig{capacity ? capacity : descs.size(), 1, 0.1});
    for (std::size_t i = 0; i < descs.size(); ++i) {
        ltm.offer(test::entry_of(descs[i], i));
    }
    return ltm;
}

oracle::Mat to_mat(const Eigen::MatrixXd& m) {
    oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
        }
    }
    return out;
}

oracle::Mat descriptors(const LongTermMemory& ltm) {
    oracle::Mat out;
    for (const auto& e : ltm.entries()) {
        out.push_back(test::to_vec(e.descriptor.values()));
    }
    return out;
}

std::vector<std::uint64_t> orders(const LongTermMemory& ltm) {
    std::vector<std::uint64_t> out;
    for (const auto& e : ltm.entries()) {
        out.push_back(e.ingest_order);
    }
    return out;
}

std::vector<std::size_t> slots_of(const std::vector<RankedSlot>& ranked) {
    std::vector<std::size_t> out;
    for (const auto& r : ranked) {
        out.push_back(r.slot);
    }
    return out;
}

TEST(FusionParams, IdentityDefaults) {
    const auto p = FusionParams::identity(4);
    EXPECT_EQ(p.dim(), 4u);
    EXPECT_DOUBLE_EQ(p.scale, 0.5);
    EXPECT_TRUE(p.w_q.isIdentity());
    FusionParams bad = p;
    bad.w_k = Eigen::MatrixXd::Identity(3, 3);
    EXPECT_STREAMMEM_ERROR(bad.validate(), InvalidArgument);
}

TEST(FuseQuery, EmptyStmIsIdentity) {
    ShortTermMemory stm(3);
    const std::vector<double> q = {0.3, -1.0, 2.0};
    EXPECT_EQ(fuse_query(q, stm, FusionParams::identity(3)), q);
}

TEST(FuseQuery, ZeroValueProjection) {
    std::mt19937_64 rng(9);
    ShortTermMemory stm(5);
    for (std::uint64_t i = 0; i < 6; ++i) {
        stm.push(test::entry_of(test::gaussian_vector(5, rng), i));
    }
    auto p = FusionParams::identity(5);
    p.w_v.setZero();
    const auto q = test::gaussian_vector(5, rng);
    EXPECT_EQ(fuse_query(q, stm, p), q);
}

TEST(FuseQuery, MatchesSoftmaxReference) {
    std::mt19937_64 rng(21);
    ShortTermMemory stm(4);
    oracle::Mat keys;
    for (std::uint64_t i = 0; i < 3; ++i) {
        stm.push(test::entry_of(test::gaussian_vector(4, rng), i));
        keys.push_back(test::to_vec(stm[i].descriptor.values()));
    }
    const auto q = test::gaussian_vector(4, rng);
    const auto p = FusionParams::identity(4);
    const auto expected = oracle::attention_fuse(q, keys, to_mat(p.w_q), to_mat(p.w_k), to_mat(p.w_v), p.scale);
    const auto got = fuse_query(q, stm, p);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(got[i], expected[i], 1e-12);
    }
}

TEST(FuseQuery, MatchesReferenceWithRandomProjections) {
    std::mt19937_64 rng(22);
    const std::size_t d = 6;
    ShortTermMemory stm(d, 5);
    oracle::Mat keys;
    for (std::uint64_t i = 0; i < 9; ++i) {
        stm.push(test::entry_of(test::gaussian_vector(d, rng), i));
    }
    for (const auto& e : stm.entries()) {
        keys.push_back(test::to_vec(e.descriptor.values()));
    }
    FusionParams p = FusionParams::identity(d);
    for (auto* m : {&p.w_q, &p.w_k, &p.w_v}) {
        for (Eigen::Index r = 0; r < m->rows(); ++r) {
            for (Eigen::Index c = 0; c < m->cols(); ++c) {
                (*m)(r, c) = test::gaussian_vector(1, rng)[0];
            }
        }
    }
    p.scale = 3.0;
    const auto q = test::gaussian_vector(d, rng);
    const auto expected = oracle::attention_fuse(q, keys, to_mat(p.w_q), to_mat(p.w_k), to_mat(p.w_v), p.scale);
    const auto got = fuse_query(q, stm, p);
    for (std::size_t i = 0; i < d; ++i) {
        EXPECT_NEAR(got[i], expected[i], 1e-12);
    }
}

TEST(FuseQuery, DimensionMismatch) {
    ShortTermMemory stm(3);
    EXPECT_STREAMMEM_ERROR(fuse_query(std::vector<double>{1, 2}, stm, FusionParams::identity(3)), DimensionMismatch);
    EXPECT_STREAMMEM_ERROR(fuse_query(std::vector<double>{1, 2, 3}, stm, FusionParams::identity(4)), DimensionMismatch);
}

TEST(ScoreLtm, AxisAligned) {
    const auto ltm = ltm_of({{1, 0}, {0, 1}, {-1, 0}});
    const auto s = score_ltm(std::vector<double>{1, 0}, ltm);
    EXPECT_DOUBLE_EQ(s[0], 1.0);
    EXPECT_DOUBLE_EQ(s[1], 0.0);
    EXPECT_DOUBLE_EQ(s[2], -1.0);
}

TEST(ScoreLtm, ScaleInvariant) {
    const auto ltm = ltm_of({{0.6, 0.8}});
    EXPECT_NEAR(score_ltm(std::vector<double>{3, 4}, ltm)[0], 1.0, 1e-15);
}

TEST(ScoreLtm, MatchesNormalizedDot) {
    std::mt19937_64 rng(100);
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 100; ++i) {
        raw.push_back(test::gaussian_vector(32, rng));
    }
    const auto ltm = ltm_of(raw);
    const auto q = test::gaussian_vector(32, rng);
    const auto s = score_ltm(q, ltm);
    for (std::size_t i = 0; i < 100; ++i) {
        EXPECT_NEAR(s[i], oracle::cosine(q, raw[i]), 1e-12);
    }
}

TEST(ScoreLtm, Errors) {
    LongTermMemory empty(2);
    EXPECT_STREAMMEM_ERROR(score_ltm(std::vector<double>{1, 0}, empty), EmptyMemory);
    const auto ltm = ltm_of({{1, 0}});
    EXPECT_STREAMMEM_ERROR(score_ltm(std::vector<double>{0, 0}, ltm), ZeroQuery);
    EXPECT_STREAMMEM_ERROR(score_ltm(std::vector<double>{1e-13, 0}, ltm), ZeroQuery);
    EXPECT_STREAMMEM_ERROR(score_ltm(std::vector<double>{1, 0, 0}, ltm), DimensionMismatch);
}

TEST(TopK, TieGoesToOlder) {
    const auto ltm = ltm_of({{1, 0}, {0, 1}, {1, 1}, {1, 2}});
    const std::vector<double> scores = {0.2, 0.9, 0.9, 0.1};
    const auto r = top_k(scores, 2, ltm);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0], (RankedSlot{1, 0.9}));
    EXPECT_EQ(r[1], (RankedSlot{2, 0.9}));
    EXPECT_EQ(oracle::topk_scores(scores, 2, {0, 1, 2, 3}), (std::vector<std::size_t>{1, 2}));
}

TEST(TopK, TieBreakUsesIngestOrderNotSlot) {
    // After evictions slot order and ingest order disagree.
    LongTermMemory ltm(2, LtmConfig{3, 1, 0.0});
    ltm.offer(test::entry_of({1, 0}, 0));
    ltm.offer(test::entry_of({1, 0}, 1));
    ltm.offer(test::entry_of({0, 1}, 2));
    ltm.offer(test::entry_of({0, 1}, 3));  // replaces slot 0
    ASSERT_EQ(ltm[0].ingest_order, 3u);
    const std::vector<double> scores = {0.5, 0.5, 0.5};
    EXPECT_EQ(slots_of(top_k(scores, 3, ltm)), (std::vector<std::size_t>{1, 2, 0}));
    EXPECT_EQ(oracle::topk_scores(scores, 3, orders(ltm)), (std::vector<std::size_t>{1, 2, 0}));
}

TEST(TopK, KLargerThanMemory) {
    std::mt19937_64 rng(10);
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 10; ++i) {
        raw.push_back(test::gaussian_vector(4, rng));
    }
    const auto ltm = ltm_of(raw);
    const auto s = score_ltm(test::gaussian_vector(4, rng), ltm);
    EXPECT_EQ(top_k(s, kDefaultTopK, ltm).size(), 10u);
    EXPECT_STREAMMEM_ERROR(top_k(s, 0, ltm), InvalidArgument);
}

TEST(TopK, MatchesFullSortOn768) {
    std::mt19937_64 rng(768);
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 768; ++i) {
        raw.push_back(test::gaussian_vector(16, rng));
    }
    const auto ltm = ltm_of(raw);
    const auto q = test::gaussian_vector(16, rng);
    const auto s = score_ltm(q, ltm);
    for (std::size_t k : {1, 32, 768}) {
        EXPECT_EQ(slots_of(top_k(s, k, ltm)), oracle::topk_scores(s, k, orders(ltm))) << "k=" << k;
        EXPECT_EQ(slots_of(top_k(s, k, ltm)), oracle::topk(descriptors(ltm), q, k, orders(ltm))) << "k=" << k;
    }
}

TEST(Retrieve, EmptyLtm) {
    std::mt19937_64 rng(5);
    ShortTermMemory stm(3);
    for (std::uint64_t i = 0; i < 5; ++i) {
        stm.push(MemoryEntry::make(test::random_feature(1, 3, rng, i), i));
    }
    const HierarchicalMemory mem(stm, LongTermMemory(3));
    const auto q = test::gaussian_vector(3, rng);
    const auto r = retrieve(q, mem.snapshot(), FusionParams::identity(3), 32);
    EXPECT_TRUE(r.ranked.empty());
    ASSERT_EQ(r.evidence.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(r.evidence[i], stm[i]);
    }
    EXPECT_EQ(r.fused_query, fuse_query(q, stm, FusionParams::identity(3)));
    EXPECT_STREAMMEM_ERROR(HierarchicalMemory(ShortTermMemory(2), LongTermMemory(3)), DimensionMismatch);
}

TEST(Retrieve, EvidenceLayoutWithDefaults) {
    std::mt19937_64 rng(48);
    HierarchicalMemory mem(8);
    for (std::uint64_t i = 0; i < 900; ++i) {
        mem.ingest(test::random_feature(1, 8, rng, i));
    }
    const auto snap = mem.snapshot();
    const auto r = retrieve(test::gaussian_vector(8, rng), snap, FusionParams::identity(8), kDefaultTopK);
    ASSERT_EQ(r.evidence.size(), 48u);
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_EQ(r.evidence[i], snap.stm()[i]);
    }
    for (std::size_t i = 0; i < 32; ++i) {
        EXPECT_EQ(r.evidence[16 + i], snap.ltm()[r.ranked[i].slot]);
    }
}

TEST(Retrieve, EqualsComposedReferences) {
    std::mt19937_64 rng(77);
    const std::size_t d = 8;
    HierarchicalMemory mem(d, MemoryConfig{6, LtmConfig{50, 4, 0.1}});
    for (std::uint64_t i = 0; i < 200; ++i) {
        mem.ingest(test::random_feature(3, d, rng, i));
    }
    const auto snap = mem.snapshot();
    const auto p = FusionParams::identity(d);
    const auto q = test::gaussian_vector(d, rng);
    oracle::Mat keys;
    for (const auto& e : snap.stm().entries()) {
        keys.push_back(test::to_vec(e.descriptor.values()));
    }
    const auto z = oracle::attention_fuse(q, keys, to_mat(p.w_q), to_mat(p.w_k), to_mat(p.w_v), p.scale);
    const auto expected = oracle::topk(descriptors(snap.ltm()), z, 10, orders(snap.ltm()));
    const auto r = retrieve(q, snap, p, 10);
    EXPECT_EQ(slots_of(r.ranked), expected);
    for (std::size_t i = 0; i < d; ++i) {
        EXPECT_NEAR(r.fused_query[i], z[i], 1e-12);
    }
}

TEST(RetrievalProperties, PrefixScaleBoundsStability) {
    std::mt19937_64 rng(314);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 2 + rng() % 10;
        HierarchicalMemory mem(d, MemoryConfig{4, LtmConfig{40, 5, 0.1}});
        for (std::uint64_t i = 0; i < 120; ++i) {
            mem.ingest(test::random_feature(1, d, rng, i));
        }
        const auto snap = mem.snapshot();
        const auto p = FusionParams::identity(d);
        const auto q = test::gaussian_vector(d, rng);
        auto prev = retrieve(q, snap, p, 1);
        for (std::size_t k = 2; k <= 41; ++k) {
            const auto cur = retrieve(q, snap, p, k);
            ASSERT_LE(prev.ranked.size(), cur.ranked.size());
            for (std::size_t i = 0; i < prev.ranked.size(); ++i) {
                ASSERT_EQ(prev.ranked[i], cur.ranked[i]);
            }
            for (std::size_t i = 0; i < cur.ranked.size(); ++i) {
                ASSERT_GE(cur.ranked[i].score, -1.0 - 1e-9);
                ASSERT_LE(cur.ranked[i].score, 1.0 + 1e-9);
                if (i > 0) {
                    ASSERT_GE(cur.ranked[i - 1].score, cur.ranked[i].score);
                }
            }
            prev = cur;
        }

        auto zero = p;
        zero.w_q.setZero();
        zero.w_k.setZero();
        zero.w_v.setZero();
        const auto base = slots_of(retrieve(q, snap, zero, 16).ranked);
        for (double c : {1e-3, 0.5, 7.0, 1e4}) {
            std::vector<double> scaled = q;
            for (auto& x : scaled) {
                x *= c;
            }
            ASSERT_EQ(slots_of(retrieve(scaled, snap, zero, 16).ranked), base);
        }

        const auto a = retrieve(q, snap, p, 16);
        const auto b = retrieve(q, snap, p, 16);
        ASSERT_EQ(a.ranked, b.ranked);
        ASSERT_EQ(a.fused_query, b.fused_query);
    }
}

}  // namespace
}  // namespace streammem
