// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "streammem/error.hpp"

namespace streammem {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ZeroVector:
        return "ZeroVector";
    case ErrorCode::DimensionMismatch:
        return "DimensionMismatch";
    case ErrorCode::NonMonotonicIngestOrder:
        return "NonMonotonicIngestOrder";
    case ErrorCode::ZeroQuery:
        return "ZeroQuery";
    case ErrorCode::EmptyMemory:
        return "EmptyMemory";
    case ErrorCode::InvalidArgument:
        return "InvalidArgument";
    case ErrorCode::InvalidSpec:
        return "InvalidSpec";
    case ErrorCode::InvalidConfig:
        return "InvalidConfig";
    case ErrorCode::UnknownPolicy:
        return "UnknownPolicy";
    case ErrorCode::BadMagic:
        return "BadMagic";
    case ErrorCode::VersionUnsupported:
        return "VersionUnsupported";
    case ErrorCode::TruncatedPayload:
        return "TruncatedPayload";
    case ErrorCode::TrailingData:
        return "TrailingData";
    case ErrorCode::NonFiniteValue:
        return "NonFiniteValue";
    case ErrorCode::HeterogeneousFrames:
        return "HeterogeneousFrames";
    case ErrorCode::IoFailure:
        return "IoFailure";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
    return code != ErrorCode::IoFailure;
}

}  // namespace streammem
