#pragma once

#include <stdexcept>
#include <string>

namespace adsim {

/// Process exit codes used by the CLI.
enum class ExitCode : int { ok = 0, config = 1, stability = 2, io = 3 };

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg, ExitCode code = ExitCode::config)
        : std::runtime_error(msg), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg, ExitCode::config) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg, ExitCode::config) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg, ExitCode::config) {}
};

class StabilityError : public Error {
public:
    explicit StabilityError(const std::string& msg) : Error(msg, ExitCode::stability) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg, ExitCode::config) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg, ExitCode::io) {}
};

}  // namespace adsim
