// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace streammem::cli {

namespace {

template <typename T>
T require(const json& j, const char* key) {
    STREAMMEM_CHECK(j.contains(key), InvalidConfig, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("field '") + key + "': " + e.what());
    }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    return require<T>(j, key);
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* key, std::size_t dim) {
    const auto rows = require<std::vector<std::vector<double>>>(j, key);
    STREAMMEM_CHECK(rows.size() == dim, InvalidConfig, std::string(key) + " must have d rows");
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        STREAMMEM_CHECK(row.size() == dim, InvalidConfig, std::string(key) + " must have d columns");
        for (Eigen::Index c = 0; c < d; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)];
        }
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    STREAMMEM_CHECK(in.is_open(), IoFailure, "cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, "'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

SceneSpec scene_spec_from_json(const json& j) {
    STREAMMEM_CHECK(j.is_object(), InvalidConfig, "scene spec must be a JSON object");
    SceneSpec spec;
    spec.num_scenes = require<std::size_t>(j, "num_scenes");
    spec.scene_lengths = require<std::vector<std::size_t>>(j, "scene_lengths");
    spec.centroid_seed = require<std::uint64_t>(j, "centroid_seed");
    spec.noise_sigma = require<double>(j, "noise_sigma");
    spec.dim = require<std::size_t>(j, "dim");
    spec.validate();
    return spec;
}

json to_json(const SceneSpec& spec) {
    return json{{"num_scenes", spec.num_scenes},
                {"scene_lengths", spec.scene_lengths},
                {"centroid_seed", spec.centroid_seed},
                {"noise_sigma", spec.noise_sigma},
                {"dim", spec.dim}};
}

FusionParams fusion_params_from_json(const json& j) {
    STREAMMEM_CHECK(j.is_object(), InvalidConfig, "fusion params must be a JSON object");
    const auto dim = require<std::size_t>(j, "dim");
    STREAMMEM_CHECK(dim >= 1, InvalidConfig, "fusion dim must be positive");
    FusionParams p;
    p.w_q = matrix_from_json(j, "w_q", dim);
    p.w_k = matrix_from_json(j, "w_k", dim);
    p.w_v = matrix_from_json(j, "w_v", dim);
    p.scale = optional_field<double>(j, "scale", 1.0 / std::sqrt(static_cast<double>(dim)));
    try {
        p.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    return p;
}

json to_json(const FusionParams& params) {
    return json{{"dim", params.dim()},
                {"w_q", matrix_to_json(params.w_q)},
                {"w_k", matrix_to_json(params.w_k)},
                {"w_v", matrix_to_json(params.w_v)},
                {"scale", params.scale}};
}

RaclFixtureSpec racl_fixture_from_json(const json& j, RaclFixtureSpec spec) {
    STREAMMEM_CHECK(j.is_object(), InvalidConfig, "batch spec must be a JSON object");
    spec.batch = optional_field<std::size_t>(j, "B", spec.batch);
    if (j.contains("T")) {
        if (j.at("T").is_array()) {
            spec.frames_per_sample = require<std::vector<std::size_t>>(j, "T");
        } else {
            spec.frames_per_sample.assign(spec.batch, require<std::size_t>(j, "T"));
        }
    }
    spec.dim = optional_field<std::size_t>(j, "d", spec.dim);
    spec.temperature = optional_field<double>(j, "tau", spec.temperature);
    spec.num_shift_negatives = optional_field<std::size_t>(j, "K_neg", spec.num_shift_negatives);
    spec.ltm_samples = optional_field<std::size_t>(j, "M", spec.ltm_samples);
    spec.ltm_frames = optional_field<std::size_t>(j, "ltm_frames", spec.ltm_frames);
    spec.seed = optional_field<std::uint64_t>(j, "seed", spec.seed);
    const auto mode =
        optional_field<std::string>(j, "mode", spec.mode == NegativeMode::ComponentShift ? "component" : "in_batch");
    STREAMMEM_CHECK(mode == "component" || mode == "in_batch", InvalidConfig, "mode must be component or in_batch");
    spec.mode = mode == "component" ? NegativeMode::ComponentShift : NegativeMode::InBatchShift;
    STREAMMEM_CHECK(spec.temperature > 0.0, InvalidConfig, "tau must be > 0");
    return spec;
}

json to_json(const EvictionReport& r) {
    return json{{"type", "offer"},
                {"frame_counter", r.frame_counter},
                {"ingest_order", r.ingest_order},
                {"admitted", r.admitted},
                {"evicted", r.evicted},
                {"evicted_ingest_order", r.evicted_ingest_order ? json(*r.evicted_ingest_order) : json(nullptr)},
                {"slot", r.slot ? json(*r.slot) : json(nullptr)},
                {"refreshed", r.refreshed}};
}

json to_json(const StreamMetrics& m) {
    return json{{"scene_coverage", optional_number(m.scene_coverage)},
                {"diversity", m.diversity},
                {"recall_at_k", optional_number(m.recall_at_k)},
                {"ingest_throughput", m.ingest_throughput},
                {"frames_ingested", m.frames_ingested},
                {"frames_skipped", m.frames_skipped},
                {"retained", m.retained}};
}

json to_json(const RetrievalResult& result, const LongTermMemory& ltm) {
    json ranked = json::array();
    for (const auto& r : result.ranked) {
        ranked.push_back({{"slot", r.slot}, {"ingest_order", ltm[r.slot].ingest_order}, {"score", r.score}});
    }
    json evidence = json::array();
    for (const auto& e : result.evidence) {
        evidence.push_back(e.ingest_order);
    }
    return json{{"fused_query", result.fused_query}, {"ranked", ranked}, {"evidence", evidence}};
}

std::string csv_number(double v) {
    return json(v).dump();
}

std::string csv_optional(const std::optional<double>& v) {
    return v ? csv_number(*v) : std::string();
}

}  // namespace streammem::cli
