#pragma once

#include <stdexcept>
#include <string>

namespace annealtherm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad argument values, mismatched lengths, malformed input files.
struct ValidationError : Error {
    using Error::Error;
};

/// Problem size exceeds a dense-solver cap.
struct SizeCapError : Error {
    using Error::Error;
};

/// Operation called on a model it does not support (e.g. the free-fermion
/// oracle on a nonuniform chain).
struct UnsupportedModelError : Error {
    using Error::Error;
};

/// Root finding failed because the bracketing condition does not hold.
struct NoCrossingError : Error {
    using Error::Error;
};

/// Config file rejected; carries a line number when one is known.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_number(line) {}
    int line_number;
};

}  // namespace annealtherm
