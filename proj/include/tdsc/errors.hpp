#pragma once

#include <stdexcept>
#include <string>

namespace tdsc {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape / dimension disagreements (matrices, label vectors vs. frames, ...).
struct DimensionMismatch : Error {
    using Error::Error;
};

// Triangular factorization did not succeed (input not positive definite).
struct FactorizationFailed : Error {
    using Error::Error;
};

// Input required to be symmetric is not.
struct AsymmetricInput : Error {
    using Error::Error;
};

// A function handed to the finite-difference oracle returned NaN/Inf.
struct NonFiniteEvaluation : Error {
    using Error::Error;
};

// A head output column has (near-)zero norm; normalization is undefined.
struct ZeroNormColumn : Error {
    using Error::Error;
};

// Sinkhorn input has a row or column without any positive entry.
struct EmptyRowOrColumn : Error {
    using Error::Error;
};

// Label vectors of unequal length.
struct LengthMismatch : Error {
    using Error::Error;
};

// Requested more clusters than points.
struct KTooLarge : Error {
    using Error::Error;
};

// Bad configuration value or combination.
struct InvalidConfig : Error {
    using Error::Error;
};

// Malformed input file; message carries the line number where known.
struct ParseError : Error {
    using Error::Error;
};

// CSV rows with inconsistent widths.
struct RaggedRows : ParseError {
    using ParseError::ParseError;
};

// Input file holds no frames.
struct EmptyFile : ParseError {
    using ParseError::ParseError;
};

// File could not be opened / read / written.
struct IoError : Error {
    using Error::Error;
};

// Training loss became NaN/Inf; message carries the step index.
struct NonFiniteLoss : Error {
    using Error::Error;
};

// Normalization by a zero quantity (e.g. commutator diagnostic on Z = 0).
struct DivisionByZero : Error {
    using Error::Error;
};

}  // namespace tdsc
