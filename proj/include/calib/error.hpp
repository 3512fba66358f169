#pragma once

#include <stdexcept>
#include <string>

namespace calib {

// Base of every error the library raises. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// Input file is missing a required column or has a malformed header.
class SchemaError : public Error {
public:
    using Error::Error;
};

// A value violates a domain invariant (bounds, simplex, duplicates, NaN).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Feature rows and prediction records do not match up by id.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// Binary payload size disagrees with its descriptor.
class LengthError : public Error {
public:
    using Error::Error;
};

// Unknown method tag or version in a persisted file.
class FormatVersionError : public Error {
public:
    using Error::Error;
};

// Operation needs data the input does not carry (e.g. full probabilities).
class CapabilityError : public Error {
public:
    using Error::Error;
};

// Quantity is mathematically undefined for this input (zero variance, no errors).
class UndefinedError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace calib
