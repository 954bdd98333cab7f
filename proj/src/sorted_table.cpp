#include "statedb/sorted_table.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <numeric>
#include <queue>
#include <sys/mman.h>
#include <unistd.h>

#include "statedb/file.hpp"

namespace statedb {

Run::Run(std::filesystem::path path, const TableSchema& schema, unsigned level, BlockNumber min_block,
         BlockNumber max_block)
    : path_{std::move(path)},
      key_width_{schema.key_width},
      row_width_{schema.row_width()},
      level_{level},
      min_block_{min_block},
      max_block_{max_block}
{
    const int fd = ::open(path_.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) {
        throw StorageError(path_, 0, std::string("open run failed: ") + std::strerror(errno));
    }
    size_ = static_cast<std::size_t>(::lseek(fd, 0, SEEK_END));
    if (size_ % row_width_ != 0) {
        ::close(fd);
        throw CorruptionError("run " + path_.string() + " size is not a multiple of the row width");
    }
    rows_ = size_ / row_width_;
    if (size_ > 0) {
        void* p = ::mmap(nullptr, size_, PROT_READ, MAP_SHARED, fd, 0);
        if (p == MAP_FAILED) {
            ::close(fd);
            throw StorageError(path_, 0, std::string("mmap failed: ") + std::strerror(errno));
        }
        data_ = static_cast<const std::uint8_t*>(p);
    }
    ::close(fd);
}

Run::~Run()
{
    if (data_ != nullptr) {
        ::munmap(const_cast<std::uint8_t*>(data_), size_);
    }
}

const std::uint8_t* Run::floor(ByteView key, BlockNumber b) const
{
    std::uint8_t probe[128];
    std::memcpy(probe, key.data(), key_width_);
    put_be64(probe + key_width_, b);
    const std::size_t prefix = key_width_ + 8;

    // First row whose prefix is greater than key || b.
    std::size_t lo = 0;
    std::size_t hi = rows_;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (std::memcmp(row(mid), probe, prefix) <= 0) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo == 0) {
        return nullptr;
    }
    const std::uint8_t* candidate = row(lo - 1);
    return std::memcmp(candidate, key.data(), key_width_) == 0 ? candidate : nullptr;
}

std::optional<ByteView> floor_lookup(const RunList& runs, const TableSchema& schema, ByteView key, BlockNumber b)
{
    for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
        const Run& run = **it;
        if (run.min_block() > b) {
            continue;
        }
        if (const std::uint8_t* row = run.floor(key, b)) {
            return ByteView{row + schema.prefix_width(), schema.payload_width};
        }
    }
    return std::nullopt;
}

void sort_rows(Bytes& rows, const TableSchema& schema)
{
    const std::size_t width = schema.row_width();
    const std::size_t prefix = schema.prefix_width();
    const std::size_t n = rows.size() / width;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::memcmp(rows.data() + a * width, rows.data() + b * width, prefix) < 0;
    });
    Bytes sorted(rows.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(sorted.data() + i * width, rows.data() + order[i] * width, width);
    }
    rows.swap(sorted);
}

std::shared_ptr<const Run> write_run(const std::filesystem::path& path, const TableSchema& schema, const Bytes& rows,
                                     unsigned level, BlockNumber min_block, BlockNumber max_block, bool sync)
{
    {
        File f{path};
        f.truncate(0);
        f.write_at(0, rows);
        if (sync) {
            f.sync();
        }
    }
    return std::make_shared<const Run>(path, schema, level, min_block, max_block);
}

std::shared_ptr<const Run> merge_runs(const std::filesystem::path& path, const TableSchema& schema, const RunList& inputs,
                                      unsigned level, bool sync)
{
    const std::size_t width = schema.row_width();
    const std::size_t prefix = schema.prefix_width();

    struct Cursor {
        const Run* run;
        std::size_t pos;
    };
    auto greater = [prefix](const Cursor& a, const Cursor& b) {
        return std::memcmp(a.run->row(a.pos), b.run->row(b.pos), prefix) > 0;
    };
    std::priority_queue<Cursor, std::vector<Cursor>, decltype(greater)> heap{greater};
    BlockNumber lo = ~BlockNumber{0};
    BlockNumber hi = 0;
    std::size_t total = 0;
    for (const auto& run : inputs) {
        lo = std::min(lo, run->min_block());
        hi = std::max(hi, run->max_block());
        total += run->rows();
        if (run->rows() > 0) {
            heap.push(Cursor{run.get(), 0});
        }
    }

    File f{path};
    f.truncate(0);
    Bytes buffer;
    constexpr std::size_t kChunk = 1 << 20;
    buffer.reserve(kChunk + width);
    std::uint64_t offset = 0;
    while (!heap.empty()) {
        Cursor c = heap.top();
        heap.pop();
        const std::uint8_t* row = c.run->row(c.pos);
        buffer.insert(buffer.end(), row, row + width);
        if (++c.pos < c.run->rows()) {
            heap.push(c);
        }
        if (buffer.size() >= kChunk) {
            f.write_at(offset, buffer);
            offset += buffer.size();
            buffer.clear();
        }
    }
    f.write_at(offset, buffer);
    offset += buffer.size();
    if (offset != total * width) {
        throw CorruptionError("merge of " + schema.name + " lost rows");
    }
    if (sync) {
        f.sync();
    }
    return std::make_shared<const Run>(path, schema, level, lo, hi);
}

} // namespace statedb
