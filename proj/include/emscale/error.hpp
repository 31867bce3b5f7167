#pragma once

#include <stdexcept>
#include <string>

namespace emscale {

// Error categories map 1:1 onto CLI exit codes (see cli.hpp).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration, malformed input files, violated preconditions. Exit 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem / stream failures. Exit 3.
class IoError : public Error {
public:
    using Error::Error;
};

// Not enough traces, batches, or points to compute the requested quantity. Exit 4.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Non-finite likelihoods, failed selections, degenerate arithmetic. Exit 5.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace emscale
