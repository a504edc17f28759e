#pragma once

#include <stdexcept>
#include <string>

namespace projcvm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimMismatch : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };
struct TieEncountered : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };
struct AllTuplesTied : Error { using Error::Error; };
struct UnequalSizes : Error { using Error::Error; };
struct ZeroBandwidth : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct TooManySplits : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct WeightsNotBalanced : Error { using Error::Error; };
struct NoUsableReference : Error { using Error::Error; };
struct BadStructure : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };

}  // namespace projcvm
