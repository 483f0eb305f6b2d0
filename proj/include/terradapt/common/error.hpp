#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace terradapt {

// Base of every error raised by the library. kind() is a stable tag used by
// the CLI when it reports failures as JSON.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual std::string_view kind() const noexcept { return "Error"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    [[nodiscard]] std::string_view kind() const noexcept override { return "ConfigError"; }
};

class DimensionError : public Error {
public:
    using Error::Error;
    [[nodiscard]] std::string_view kind() const noexcept override { return "DimensionError"; }
};

// Non-finite values or a numerical breakdown (divergence, failed factorization).
class NumericalError : public Error {
public:
    using Error::Error;
    [[nodiscard]] std::string_view kind() const noexcept override { return "NumericalError"; }
};

// A quantity evaluated outside the region where it is defined (slip at zero speed,
// degenerate path frame).
class DomainError : public Error {
public:
    using Error::Error;
    [[nodiscard]] std::string_view kind() const noexcept override { return "DomainError"; }
};

class IoError : public Error {
public:
    using Error::Error;
    [[nodiscard]] std::string_view kind() const noexcept override { return "IoError"; }
};

} // namespace terradapt
