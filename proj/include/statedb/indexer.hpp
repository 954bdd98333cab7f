#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "statedb/page_pool.hpp"
#include "statedb/store.hpp"

namespace statedb {

/// Linear-hash table from fixed-width keys to 8-byte values over two paged
/// files: primary buckets (bucket i = page i) and a shared overflow file for
/// chained pages.
///
/// Bucket page layout: entry count u32, reserved u32, next overflow page + 1
/// u64 (0 ends the chain), then (key, value u64) slots.
class LinearHashTable {
public:
    struct State {
        std::uint32_t level = 0;
        std::uint64_t split = 0;
        std::uint64_t count = 0;
        std::uint64_t overflow_pages = 0;
        std::vector<std::uint64_t> free_overflow;
    };

    static constexpr std::size_t kHeaderSize = 16;
    static constexpr double kMaxLoad = 0.75;

    LinearHashTable(const std::filesystem::path& bucket_file, const std::filesystem::path& overflow_file,
                    std::size_t key_width, std::size_t page_size, std::size_t pool_pages, State state);

    std::optional<std::uint64_t> find(ByteView key);
    // Caller guarantees the key is absent.
    void insert(ByteView key, std::uint64_t value);

    const State& state() const noexcept { return state_; }
    std::uint64_t bucket_count() const noexcept { return (std::uint64_t{1} << state_.level) + state_.split; }
    std::size_t slots_per_page() const noexcept { return slots_per_page_; }
    std::uint64_t splits() const noexcept { return bucket_count() - 1; }

    void flush();

    static std::uint64_t key_hash(ByteView key);

private:
    struct PageRef {
        bool overflow;
        std::uint64_t id;
    };

    MutableByteView page(PageRef ref, bool for_write);
    std::uint64_t bucket_of(std::uint64_t h) const noexcept;
    void append_to_bucket(std::uint64_t bucket, ByteView key, std::uint64_t value);
    std::uint64_t allocate_overflow();
    void split();

    std::size_t key_width_;
    std::size_t slot_size_;
    std::size_t slots_per_page_;
    PagePool primary_;
    PagePool overflow_;
    State state_;
};

struct IndexerConfig {
    std::size_t bucket_page_size = 4096;
    std::size_t bucket_pool_pages = 1024;
    StoreConfig keys;
};

/// Maps sparse keys to dense ordinals 0..count-1. A reverse lookup table
/// (store of keys, record i = key with ordinal i) is appended on every new
/// key; its hash tree is the indexer's commitment, so the root depends on the
/// key sequence and not on bucket layout.
///
/// Files: <name>.buckets, <name>.overflow, <name>.keys (+ .tree), <name>.meta.
class Indexer {
public:
    Indexer(const std::filesystem::path& dir, const std::string& name, std::size_t key_width,
            const IndexerConfig& config = {});

    std::pair<RecordNumber, bool> get_or_add(ByteView key);
    std::optional<RecordNumber> get(ByteView key);
    Bytes key_at(RecordNumber r);

    Hash32 hash() { return keys_.root(); }
    bool dirty() const noexcept { return keys_.dirty(); }
    std::uint64_t digest_count() const noexcept { return keys_.tree().digest_count(); }

    std::uint64_t count() const noexcept { return table_.state().count; }
    std::size_t key_width() const noexcept { return key_width_; }
    const LinearHashTable& table() const noexcept { return table_; }

    void flush();

private:
    static LinearHashTable::State load_state(const std::filesystem::path& meta, std::size_t key_width);

    std::size_t key_width_;
    std::filesystem::path meta_path_;
    LinearHashTable table_;
    Store keys_;
};

} // namespace statedb
