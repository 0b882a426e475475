// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "streammem/error.hpp"
#include "streammem/feature_map.hpp"
#include "streammem/hierarchical_memory.hpp"
#include "streammem/long_term_memory.hpp"
#include "streammem/racl.hpp"
#include "streammem/retrieval.hpp"
#include "streammem/short_term_memory.hpp"
#include "streammem/stream_file.hpp"
#include "streammem/stream_sim.hpp"
