// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <stdexcept>
#include <string>

namespace ledcal {

/// Raised when an input violates a precondition (bad file, bad geometry,
/// bad parameter). Maps to exit code 2 in the command-line tool.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a solver cannot produce a result from valid-looking inputs
/// (ill-conditioned primaries, degenerate lighting, rank-deficient systems).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ledcal
