#pragma once

#include <stdexcept>
#include <string>

namespace oodsim {

/// Base class for every error the library reports to callers.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data violates a schema or a precondition of an operation.
class DataError : public Error {
public:
    using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
    Success = 0,
    ConfigInvalid = 2,
    DataInvalid = 3,
    IoFailure = 4,
};

} // namespace oodsim
