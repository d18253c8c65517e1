#pragma once

#include <stdexcept>
#include <string>

namespace sparseoracle {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A source matrix is not in canonical form or violates a precondition.
struct InvalidInput : Error {
    using Error::Error;
};

// Dense allocation of a DIA/ELL-backed structure exceeds the configured cap;
// the target format is infeasible for this sparsity pattern.
struct PaddingOverflow : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct EmptyMatrix : Error {
    using Error::Error;
};

// Model file failed validation; message carries the offending line number.
struct MalformedModel : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct TooFewSamples : Error {
    using Error::Error;
};

struct UnsupportedFormat : Error {
    using Error::Error;
};

// Text input failed to parse; message carries the offending line number.
struct ParseError : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

struct NetworkError : Error {
    using Error::Error;
};

struct ChecksumMismatch : Error {
    using Error::Error;
};

struct JoinError : Error {
    using Error::Error;
};

struct AllFormatsInfeasible : Error {
    using Error::Error;
};

}  // namespace sparseoracle
