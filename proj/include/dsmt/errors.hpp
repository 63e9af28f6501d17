/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <stdexcept>
#include <string>

namespace dsmt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// expression / evaluation
struct NondefinedAtPoint : Error { using Error::Error; };
struct PrecisionUnreachable : Error { using Error::Error; };

// normalization
struct UnboundedVariable : Error { using Error::Error; };
struct UndefinedSubterm : Error { using Error::Error; };
struct NonpositiveDelta : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct EmptyInterior : Error { using Error::Error; };

// boxes
struct DegenerateBisect : Error { using Error::Error; };

// ODE enclosures
struct StepRejected : Error { using Error::Error; };
struct BlowUp : Error { using Error::Error; };

// solver configuration
struct UnboundedDerivative : Error { using Error::Error; };

// frontend
struct ParseError : Error {
    ParseError(const std::string& msg, int line, int col)
        : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(col) + ")"),
          line(line), col(col) {}
    int line;
    int col;
};
struct UndeclaredVariable : Error { using Error::Error; };
struct MissingBounds : Error { using Error::Error; };

} // namespace dsmt
