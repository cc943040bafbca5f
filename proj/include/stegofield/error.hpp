#pragma once

#include <stdexcept>
#include <string>

namespace stegofield {

/// Malformed or unreadable input data (files, datasets, checkpoints, key files).
class DataError : public std::runtime_error {
public:
    enum class Kind { Io, Format, BadMagic, VersionMismatch, Truncated, NonFinite, InvalidKey };

    DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A NaN or Inf showed up where finite values are required.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stegofield
