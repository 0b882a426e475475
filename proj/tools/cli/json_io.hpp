// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "streammem/streammem.hpp"

namespace streammem::cli {

using nlohmann::json;

/// Reads a JSON document; IoFailure if unreadable, InvalidConfig if malformed.
json load_json(const std::filesystem::path& path);

/// {"num_scenes", "scene_lengths", "centroid_seed", "noise_sigma", "dim"}
SceneSpec scene_spec_from_json(const json& j);
json to_json(const SceneSpec& spec);

/// {"dim": d, "w_q": [[..]], "w_k": [[..]], "w_v": [[..]], "scale": optional, default 1/sqrt(d)}
FusionParams fusion_params_from_json(const json& j);
json to_json(const FusionParams& params);

/// {"B", "T": [..] | T_i scalar, "d", "tau", "K_neg", "M", "ltm_frames", "seed", "mode"}; all optional.
RaclFixtureSpec racl_fixture_from_json(const json& j, RaclFixtureSpec defaults);

json to_json(const EvictionReport& report);
json to_json(const StreamMetrics& metrics);
json to_json(const RetrievalResult& result, const LongTermMemory& ltm);

std::string csv_number(double v);
std::string csv_optional(const std::optional<double>& v);

}  // namespace streammem::cli
