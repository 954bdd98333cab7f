#include "statedb/file.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

namespace statedb {

StorageError::StorageError(const std::filesystem::path& path, std::uint64_t offset, const std::string& what)
    : Error(path.string() + " @" + std::to_string(offset) + ": " + what), path_{path}, offset_{offset}
{
}

namespace {

std::string errno_text()
{
    return std::strerror(errno);
}

} // namespace

File::File(const std::filesystem::path& path, Mode mode) : path_{path}
{
    const int flags = mode == Mode::ReadOnly ? O_RDONLY : (O_RDWR | O_CREAT);
    fd_ = ::open(path.c_str(), flags | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw StorageError(path, 0, "open failed: " + errno_text());
    }
}

File::~File()
{
    close();
}

File::File(File&& other) noexcept : fd_{other.fd_}, path_{std::move(other.path_)}
{
    other.fd_ = -1;
}

File& File::operator=(File&& other) noexcept
{
    if (this != &other) {
        close();
        fd_ = other.fd_;
        path_ = std::move(other.path_);
        other.fd_ = -1;
    }
    return *this;
}

void File::close() noexcept
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::size_t File::read_at(std::uint64_t offset, MutableByteView out) const
{
    std::size_t done = 0;
    while (done < out.size()) {
        const ssize_t n = ::pread(fd_, out.data() + done, out.size() - done, static_cast<off_t>(offset + done));
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw StorageError(path_, offset + done, "read failed: " + errno_text());
        }
        if (n == 0) {
            break;
        }
        done += static_cast<std::size_t>(n);
    }
    return done;
}

void File::read_exact(std::uint64_t offset, MutableByteView out) const
{
    if (read_at(offset, out) != out.size()) {
        throw StorageError(path_, offset, "short read of " + std::to_string(out.size()) + " bytes");
    }
}

void File::write_at(std::uint64_t offset, ByteView data)
{
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::pwrite(fd_, data.data() + done, data.size() - done, static_cast<off_t>(offset + done));
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw StorageError(path_, offset + done, "write failed: " + errno_text());
        }
        done += static_cast<std::size_t>(n);
    }
}

std::uint64_t File::size() const
{
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
        throw StorageError(path_, 0, "stat failed: " + errno_text());
    }
    return static_cast<std::uint64_t>(st.st_size);
}

void File::truncate(std::uint64_t size)
{
    if (::ftruncate(fd_, static_cast<off_t>(size)) != 0) {
        throw StorageError(path_, size, "truncate failed: " + errno_text());
    }
}

void File::sync()
{
    if (::fdatasync(fd_) != 0) {
        throw StorageError(path_, 0, "fdatasync failed: " + errno_text());
    }
}

} // namespace statedb
