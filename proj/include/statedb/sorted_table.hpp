#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "statedb/types.hpp"

namespace statedb {

// Rows are key || block (u64 BE) || payload and sort bytewise on key || block,
// which orders by key and then numerically by block.
struct TableSchema {
    std::string name;
    std::size_t key_width;
    std::size_t payload_width;

    std::size_t prefix_width() const noexcept { return key_width + 8; }
    std::size_t row_width() const noexcept { return key_width + 8 + payload_width; }
};

// Immutable, memory-mapped run file of sorted rows. The mapping outlives
// unlinking, so readers holding a run keep working after a merge removes it.
class Run {
public:
    Run(std::filesystem::path path, const TableSchema& schema, unsigned level, BlockNumber min_block,
        BlockNumber max_block);
    ~Run();

    Run(const Run&) = delete;
    Run& operator=(const Run&) = delete;

    std::size_t rows() const noexcept { return rows_; }
    const std::uint8_t* row(std::size_t i) const noexcept { return data_ + i * row_width_; }
    unsigned level() const noexcept { return level_; }
    BlockNumber min_block() const noexcept { return min_block_; }
    BlockNumber max_block() const noexcept { return max_block_; }
    const std::filesystem::path& path() const noexcept { return path_; }

    // Greatest row with this key and block <= b.
    const std::uint8_t* floor(ByteView key, BlockNumber b) const;

private:
    std::filesystem::path path_;
    std::size_t key_width_;
    std::size_t row_width_;
    unsigned level_;
    BlockNumber min_block_;
    BlockNumber max_block_;
    const std::uint8_t* data_ = nullptr;
    std::size_t size_ = 0;
    std::size_t rows_ = 0;
};

using RunList = std::vector<std::shared_ptr<const Run>>; // oldest first

// Newest run first; runs cover ascending, disjoint block ranges, so the
// first hit is the answer. Returns the payload.
std::optional<ByteView> floor_lookup(const RunList& runs, const TableSchema& schema, ByteView key, BlockNumber b);

// Sorts rows in place by key || block.
void sort_rows(Bytes& rows, const TableSchema& schema);

// Writes sorted rows as a new run file and maps it.
std::shared_ptr<const Run> write_run(const std::filesystem::path& path, const TableSchema& schema, const Bytes& rows,
                                     unsigned level, BlockNumber min_block, BlockNumber max_block, bool sync);

// K-way merge of runs into one run file at the given level.
std::shared_ptr<const Run> merge_runs(const std::filesystem::path& path, const TableSchema& schema, const RunList& inputs,
                                      unsigned level, bool sync);

} // namespace statedb
