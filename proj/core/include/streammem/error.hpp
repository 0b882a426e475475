// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace streammem {

enum class ErrorCode {
    ZeroVector,
    DimensionMismatch,
    NonMonotonicIngestOrder,
    ZeroQuery,
    EmptyMemory,
    InvalidArgument,
    InvalidSpec,
    InvalidConfig,
    UnknownPolicy,
    BadMagic,
    VersionUnsupported,
    TruncatedPayload,
    TrailingData,
    NonFiniteValue,
    HeterogeneousFrames,
    IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by malformed user input (bad config, bad file contents),
/// false for runtime failures such as I/O.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message),
          m_code(code) {}

    ErrorCode code() const noexcept {
        return m_code;
    }

private:
    ErrorCode m_code;
};

#define STREAMMEM_CHECK(cond, code, msg)                       \
    do {                                                       \
        if (!(cond)) {                                         \
            throw ::streammem::Error(::streammem::ErrorCode::code, (msg)); \
        }                                                      \
    } while (false)

}  // namespace streammem
