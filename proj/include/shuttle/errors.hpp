#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace shuttle {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A single frame file could not be decoded. The sequence itself stays usable.
class FrameDecodeError : public Error {
public:
    FrameDecodeError(std::filesystem::path path, const std::string& what)
        : Error(what + ": " + path.string()), path_(std::move(path)) {}

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// Unrecoverable problem with a whole sequence (e.g. frames of different sizes).
class SequenceError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed label line; carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class TransitionError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class StoreLockedError : public Error {
public:
    using Error::Error;
};

/// A request or edit that is malformed in itself (bad box, unknown value).
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace shuttle
