#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace statedb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// I/O failure on a backing file.
class StorageError : public Error {
public:
    StorageError(const std::filesystem::path& path, std::uint64_t offset, const std::string& what);

    const std::filesystem::path& path() const noexcept { return path_; }
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::filesystem::path path_;
    std::uint64_t offset_;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

// Wrong record length, oversized code, bad configuration.
class FormatError : public Error {
public:
    using Error::Error;
};

class CorruptionError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class SequencingError : public Error {
public:
    using Error::Error;
};

// Historical query above the archive watermark.
class NotAvailableError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace statedb
