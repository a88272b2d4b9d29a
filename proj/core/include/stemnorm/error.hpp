#pragma once

#include <stdexcept>
#include <string>

namespace stemnorm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input data or user configuration: unreadable files, degenerate
/// signals, mismatched sample rates. The CLI maps these to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace stemnorm
