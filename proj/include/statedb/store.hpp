#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "statedb/hash_tree.hpp"
#include "statedb/page_pool.hpp"
#include "statedb/types.hpp"

namespace statedb {

struct StoreConfig {
    std::size_t page_size = 4096;
    std::size_t pool_pages = 1024;
    std::size_t tree_pool_pages = 256;
};

struct RecordLocation {
    PageId page;
    std::size_t slot;
    bool operator==(const RecordLocation&) const = default;
};

// Records never straddle pages: record r sits at page r / slots_per_page, slot r % slots_per_page.
constexpr RecordLocation locate_record(RecordNumber r, std::size_t slots_per_page) noexcept
{
    return {r / slots_per_page, static_cast<std::size_t>(r % slots_per_page)};
}

/// Fixed-length records addressed by dense record number, backed by a page
/// pool with an attached hash tree over its pages. The tree node file is
/// `<file>.tree`. The record count is owned by the caller's metadata.
class Store {
public:
    Store(std::filesystem::path file, std::size_t record_size, const StoreConfig& config, std::uint64_t count = 0);

    void get(RecordNumber r, MutableByteView out);
    Bytes get(RecordNumber r);

    // r == count() appends.
    void set(RecordNumber r, ByteView record);

    Hash32 root();
    void flush();

    std::uint64_t count() const noexcept { return count_; }
    std::size_t record_size() const noexcept { return record_size_; }
    std::size_t slots_per_page() const noexcept { return slots_per_page_; }
    std::uint64_t page_count() const noexcept { return pool_.page_count(); }
    bool dirty() const noexcept { return tree_.dirty(); }
    const HashTree& tree() const noexcept { return tree_; }
    const PagePool& pool() const noexcept { return pool_; }

private:
    ByteView read_page(std::uint64_t leaf);

    std::size_t record_size_;
    std::size_t slots_per_page_;
    std::uint64_t count_;
    PagePool pool_;
    HashTree tree_;
};

/// Variable-length code keyed by record number. A meta store of
/// (offset u64, length u32, code_hash 32) records points into an append-only
/// blob file; overwritten bodies stay in the blob as garbage. A zero meta
/// record means "no code" and reads as empty.
class Depot {
public:
    static constexpr std::size_t kMetaSize = 8 + 4 + 32;

    Depot(const std::filesystem::path& meta_file, const std::filesystem::path& blob_file, const StoreConfig& config,
          std::uint64_t count = 0, bool verify_reads = true);

    void set(RecordNumber r, const Code& code);
    // Writes the "no code" record.
    void clear(RecordNumber r);
    Code get(RecordNumber r);
    Hash32 code_hash(RecordNumber r);

    Hash32 root() { return meta_.root(); }
    void flush();

    std::uint64_t count() const noexcept { return meta_.count(); }
    std::uint64_t blob_size() const noexcept { return blob_size_; }
    bool dirty() const noexcept { return meta_.dirty(); }
    const Store& meta() const noexcept { return meta_; }

private:
    Store meta_;
    File blob_;
    std::uint64_t blob_size_;
    bool verify_reads_;
};

} // namespace statedb
