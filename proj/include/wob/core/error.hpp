#pragma once

#include <stdexcept>
#include <string>

namespace wob {

/// Process exit codes shared by the CLI and the error hierarchy below.
enum class ExitCode : int {
    Ok = 0,
    Config = 2,
    Io = 3,
    DataIntegrity = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Invalid configuration, scene file or parameter.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::Config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ExitCode::Io, what) {}
};

/// Corrupt, truncated or inconsistent on-disk data.
class DataIntegrityError : public Error {
public:
    explicit DataIntegrityError(const std::string& what) : Error(ExitCode::DataIntegrity, what) {}
};

/// Non-finite values during training.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ExitCode::DataIntegrity, what) {}
};

}  // namespace wob
