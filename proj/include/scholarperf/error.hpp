#pragma once

#include <stdexcept>
#include <string>

namespace scholarperf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: files, configuration, arguments.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical stage failed on otherwise valid input.
class ComputeError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public ComputeError {
public:
    using ComputeError::ComputeError;
};

/// Coefficients diverge because some regressor (quasi-)separates the response.
class SeparationError : public ComputeError {
public:
    using ComputeError::ComputeError;
};

}  // namespace scholarperf
