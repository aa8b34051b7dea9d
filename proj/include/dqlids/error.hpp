#pragma once

#include <stdexcept>
#include <string>

namespace dqlids {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (bad field count, non-numeric value, unknown name).
class ParseError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or gradient during training.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace dqlids
