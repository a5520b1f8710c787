#ifndef GRAPHDIFF_ERRORS_HPP
#define GRAPHDIFF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace graphdiff {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameter combination exceeds the enumeration guard.
struct SizeError : Error {
    using Error::Error;
};

// Out-of-bounds state index or token address.
struct BoundsError : Error {
    using Error::Error;
};

// Time or noise argument outside its domain.
struct DomainError : Error {
    using Error::Error;
};

// Zero-probability transition (Absorb MASK -> real, etc.).
struct ImpossibleTransitionError : Error {
    using Error::Error;
};

// exact_score asked about a state with zero marginal probability.
struct OracleDomainError : Error {
    using Error::Error;
};

// Tabular lookup for a condition key the scorer was never trained on.
struct UnseenKeyError : Error {
    using Error::Error;
};

// Non-finite parameter or prediction detected.
struct NumericError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Checkpoint / dataset schema does not match what the caller expects.
struct SchemaError : Error {
    using Error::Error;
};

}  // namespace graphdiff

#endif
