#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace rtoi {

// Every failure the library reports is one of three kinds. The CLI maps
// them onto exit codes 2 (config), 3 (data) and 4 (numerical).
enum class ErrorKind { Config, Data, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    // Short machine-readable reason, e.g. "PrecisionExceeded" or "Singular".
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

class ConfigError : public Error {
public:
    ConfigError(std::string code, const std::string& what)
        : Error(ErrorKind::Config, std::move(code), what) {}
};

class DataError : public Error {
public:
    DataError(std::string code, const std::string& what, std::optional<std::size_t> line = std::nullopt)
        : Error(ErrorKind::Data, std::move(code),
                line ? what + " (line " + std::to_string(*line) + ")" : what),
          line_(line) {}

    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    std::optional<std::size_t> line_;
};

class NumericalError : public Error {
public:
    NumericalError(std::string code, const std::string& what)
        : Error(ErrorKind::Numerical, std::move(code), what) {}
};

inline int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Data: return 3;
        case ErrorKind::Numerical: return 4;
    }
    return 1;
}

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Data: return "data";
        case ErrorKind::Numerical: return "numerical";
    }
    return "unknown";
}

}  // namespace rtoi
