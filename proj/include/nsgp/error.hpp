#pragma once

#include <stdexcept>
#include <string>

namespace nsgp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed prefix sequence or infix text.
struct ParseError : Error {
    using Error::Error;
};

// A variable leaf refers to a column the dataset does not have.
struct VariableIndexError : Error {
    VariableIndexError(std::size_t index, std::size_t dims)
        : Error("variable index x" + std::to_string(index) + " out of range for " + std::to_string(dims) + " feature(s)")
        , index(index)
    {
    }
    std::size_t index;
};

// Invalid dataset contents (non-numeric cell, constant target, ...).
struct DataError : Error {
    using Error::Error;
};

// Invalid run or model configuration.
struct ConfigError : Error {
    using Error::Error;
};

struct DivergenceError : Error {
    using Error::Error;
};

} // namespace nsgp
