#pragma once

#include <stdexcept>
#include <string>

namespace eevo {

// Base class for all engine errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (dimension mismatch,
// out-of-range index, invalid configuration value).
struct InvalidInput : Error {
    using Error::Error;
};

// A bounded resource would be exceeded (context longer than max_seq).
struct CapacityError : Error {
    using Error::Error;
};

// Filesystem-level failure (open/read/write).
struct IoError : Error {
    using Error::Error;
};

// Weight-file parse failure. `kind` distinguishes the error classes the
// format promises; the message names the offending field.
struct ParseError : IoError {
    enum class Kind {
        bad_magic,
        bad_version,
        truncated,
        bad_shape,
        trailing_data,
        non_finite,
    };

    ParseError(Kind k, const std::string& msg) : IoError(msg), kind(k) {}

    Kind kind;
};

}  // namespace eevo
