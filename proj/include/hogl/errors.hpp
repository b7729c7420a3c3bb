#pragma once

#include <stdexcept>
#include <string>

namespace hogl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct InvalidDimension : Error {
    using Error::Error;
};

struct ZeroColumn : Error {
    using Error::Error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct SingularS : Error {
    using Error::Error;
};

struct DfTooLarge : Error {
    using Error::Error;
};

struct ZeroSignal : Error {
    using Error::Error;
};

}  // namespace hogl
