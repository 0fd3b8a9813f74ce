// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace cstdoa {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidSpecError : public Error {
public:
    using Error::Error;
};

/// LFSR taps do not describe a primitive polynomial of the declared degree.
class PeriodMismatchError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class DegenerateOperatorError : public Error {
public:
    using Error::Error;
};

/// Channel estimate is identically zero, so no delay can be read from it.
class NoPeakError : public Error {
public:
    using Error::Error;
};

/// |c * tau| exceeds the sensor spacing.
class InadmissibleDelayError : public Error {
public:
    using Error::Error;
};

class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

/// A file-backed signal is shorter than the requested duration.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// Configuration problem. `field()` holds the dotted path of the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace cstdoa
