#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "statedb/digest.hpp"
#include "statedb/types.hpp"

namespace statedb::support {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() / ("statedb-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Straightforward recomputation of the padded binary tree root over page contents.
inline Hash32 eager_root(const std::vector<Bytes>& pages)
{
    if (pages.empty()) {
        return empty_digest();
    }
    std::vector<Hash32> level;
    for (const auto& p : pages) {
        level.push_back(digest(p));
    }
    std::size_t width = 1;
    while (width < level.size()) {
        width *= 2;
    }
    level.resize(width, empty_digest());
    while (level.size() > 1) {
        std::vector<Hash32> up;
        for (std::size_t i = 0; i < level.size(); i += 2) {
            up.push_back(digest(level[i], level[i + 1]));
        }
        level.swap(up);
    }
    return level[0];
}

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n)
{
    Bytes out(n);
    for (auto& b : out) {
        b = static_cast<std::uint8_t>(rng());
    }
    return out;
}

template <typename T>
T random_fixed(std::mt19937_64& rng)
{
    T out;
    for (auto& b : out.bytes) {
        b = static_cast<std::uint8_t>(rng());
    }
    return out;
}

inline std::vector<Bytes> read_pages(const std::filesystem::path& file, std::size_t page_size)
{
    std::vector<Bytes> pages;
    const auto size = std::filesystem::file_size(file);
    Bytes all(size);
    FILE* f = std::fopen(file.c_str(), "rb");
    if (f != nullptr) {
        const auto n = std::fread(all.data(), 1, size, f);
        all.resize(n);
        std::fclose(f);
    }
    for (std::size_t off = 0; off < all.size(); off += page_size) {
        pages.emplace_back(all.begin() + static_cast<std::ptrdiff_t>(off),
                           all.begin() + static_cast<std::ptrdiff_t>(std::min(all.size(), off + page_size)));
    }
    return pages;
}

// Every regular file under dir with its contents, keyed by relative path.
inline std::vector<std::pair<std::string, Bytes>> directory_contents(const std::filesystem::path& dir)
{
    std::vector<std::pair<std::string, Bytes>> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) {
            continue;
        }
        Bytes data(e.file_size());
        FILE* f = std::fopen(e.path().c_str(), "rb");
        if (f != nullptr) {
            data.resize(std::fread(data.data(), 1, data.size(), f));
            std::fclose(f);
        }
        out.emplace_back(std::filesystem::relative(e.path(), dir).generic_string(), std::move(data));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace statedb::support
