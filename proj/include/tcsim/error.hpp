#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcsim {

/// Machine-readable error categories. The CLI maps each to an exit code.
enum class ErrorCode {
    parse = 3,       // malformed input record
    validation = 4,  // well-formed input that violates an invariant
    format = 5,      // binary/exchange file format violations
    lookup = 6,      // missing word, step or case id
    config = 7,      // bad configuration or argument value
    io = 8,          // cannot open/read/write a file
    workspace = 9,   // missing or unusable workspace artifact
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorCode::parse, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorCode::validation, what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(ErrorCode::format, what) {}
};

class LookupError : public Error {
public:
    explicit LookupError(const std::string& what) : Error(ErrorCode::lookup, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

class WorkspaceError : public Error {
public:
    explicit WorkspaceError(const std::string& what) : Error(ErrorCode::workspace, what) {}
};

}  // namespace tcsim
