#pragma once

#include <stdexcept>
#include <string>

namespace irsbm {

/// Base of every error raised by the library. `kind()` is a short stable tag
/// used by the command-line tool when printing machine-parsable errors.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class BlockedLinkError : public Error {
public:
    explicit BlockedLinkError(const std::string& message) : Error("blocked_link", message) {}
};

class ModelFormatError : public Error {
public:
    explicit ModelFormatError(const std::string& message) : Error("model_format", message) {}
};

class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& message) : Error("training", message) {}
};

class DatasetError : public Error {
public:
    explicit DatasetError(const std::string& message) : Error("dataset", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace irsbm
