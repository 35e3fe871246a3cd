#pragma once

#include <stdexcept>
#include <string>

namespace fmcaf {

// Error taxonomy mirrored by the CLI exit codes:
// InputError -> 1, ConfigError -> 2, everything numeric/internal -> 3.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension or layout mismatch between tensors.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid hyperparameter or configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable, missing or malformed external input (files, images).
class InputError : public Error {
public:
    using Error::Error;
};

// Weight-file schema violation. A kind of input problem.
class FormatError : public InputError {
public:
    using InputError::InputError;
};

// Numeric contract violation (non-finite values, broken symmetry).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace fmcaf
