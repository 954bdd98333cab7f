#pragma once

#include <cstdint>
#include <filesystem>

#include "statedb/bytes.hpp"

namespace statedb {

// Owning POSIX file descriptor with positional I/O. Errors raise StorageError
// carrying the path and offset.
class File {
public:
    enum class Mode { ReadWrite, ReadOnly };

    File() = default;
    File(const std::filesystem::path& path, Mode mode = Mode::ReadWrite);
    ~File();

    File(File&& other) noexcept;
    File& operator=(File&& other) noexcept;
    File(const File&) = delete;
    File& operator=(const File&) = delete;

    bool is_open() const noexcept { return fd_ >= 0; }
    const std::filesystem::path& path() const noexcept { return path_; }

    // Reads up to out.size() bytes; returns the count actually read (short at EOF).
    std::size_t read_at(std::uint64_t offset, MutableByteView out) const;
    void read_exact(std::uint64_t offset, MutableByteView out) const;
    void write_at(std::uint64_t offset, ByteView data);

    std::uint64_t size() const;
    void truncate(std::uint64_t size);
    void sync();

private:
    void close() noexcept;

    int fd_ = -1;
    std::filesystem::path path_;
};

} // namespace statedb
