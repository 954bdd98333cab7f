#pragma once

#include <array>
#include <filesystem>
#include <optional>

#include "statedb/indexer.hpp"
#include "statedb/lru_cache.hpp"
#include "statedb/store.hpp"
#include "statedb/types.hpp"

namespace statedb {

struct LiveDbConfig {
    // Used when creating a database; an existing directory keeps its stored page size.
    std::size_t page_size = 4096;
    std::size_t pool_pages = 1024;
    std::size_t cache_entries = std::size_t{1} << 16;
    bool verify_code_reads = true;
};

struct WorldstateRoot {
    Hash32 root;
    BlockNumber block = 0;
    bool operator==(const WorldstateRoot&) const = default;
};

// Order of the components inside the composite root.
enum class Component : std::size_t {
    Balance,
    Nonce,
    Exists,
    Reincarnation,
    Code,
    Values,
    AccountIndex,
    SlotIndex,
};
inline constexpr std::size_t kComponentCount = 8;

struct SlotIndexKeyTag;
// address (20) || reincarnation u32 BE (4) || storage key (32)
using SlotIndexKey = FixedBytes<56, SlotIndexKeyTag>;
SlotIndexKey make_slot_index_key(const Address& a, Reincarnation r, const StorageKey& k);

/// Latest-worldstate database. Accounts get dense ordinals from an address
/// indexer and their attributes live in one fixed-record store per
/// attribute; slots get ordinals from an (address, reincarnation, key)
/// indexer and their values live in one store. Updates overwrite in place.
///
/// Deleting an account bumps its reincarnation, which hides every slot
/// written under the old one without touching them.
///
/// Single-threaded: reads go through page pools and caches that mutate on access.
class LiveDb {
public:
    explicit LiveDb(std::filesystem::path dir, LiveDbConfig config = {});
    ~LiveDb();

    LiveDb(const LiveDb&) = delete;
    LiveDb& operator=(const LiveDb&) = delete;

    Balance get_balance(const Address& a);
    Nonce get_nonce(const Address& a);
    Code get_code(const Address& a);
    bool account_exists(const Address& a);
    Reincarnation get_reincarnation(const Address& a);
    StorageValue get_storage(const Address& a, const StorageKey& k);

    // diff.block must be current_block() + 1. Slots and updates may arrive
    // unsorted; they are canonicalized before validation.
    void apply_block(BlockDiff diff);

    WorldstateRoot state_root();
    std::array<Hash32, kComponentCount> component_hashes();

    // Canonicalized form of the last applied diff.
    const BlockDiff& diff_of_block() const noexcept { return last_diff_; }

    BlockNumber current_block() const noexcept { return current_block_; }
    std::uint64_t account_count() const noexcept { return accounts_.count(); }
    std::uint64_t slot_count() const noexcept { return slots_.count(); }
    std::size_t page_size() const noexcept { return page_size_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    // Digest invocations across all hash trees plus the composite root.
    std::uint64_t digest_count() const noexcept;

    void flush();

private:
    struct Meta {
        std::size_t page_size = 4096;
        BlockNumber current_block = 0;
        std::uint64_t account_count = 0;
        std::uint64_t slot_count = 0;
    };

    LiveDb(std::filesystem::path dir, LiveDbConfig config, Meta meta);
    static Meta load_meta(const std::filesystem::path& dir, const LiveDbConfig& config);
    void write_meta();

    std::optional<RecordNumber> find_account(const Address& a);
    std::optional<RecordNumber> find_slot(const SlotIndexKey& key);
    RecordNumber add_account(const Address& a);
    Reincarnation read_reincarnation(RecordNumber account);
    void write_slot(const Address& a, Reincarnation reinc, const StorageKey& k, const StorageValue& v);

    std::filesystem::path dir_;
    LiveDbConfig config_;
    std::size_t page_size_;
    BlockNumber current_block_;

    Store balances_;
    Store nonces_;
    Store exists_;
    Store reincarnations_;
    Depot codes_;
    Store values_;
    Indexer accounts_;
    Indexer slots_;

    LruCache<Address, RecordNumber, AddressHash> account_cache_;
    LruCache<SlotIndexKey, RecordNumber, FixedBytesHash<56, SlotIndexKeyTag>> slot_cache_;

    BlockDiff last_diff_;
    std::optional<WorldstateRoot> cached_root_;
    std::uint64_t composite_digests_ = 0;
};

} // namespace statedb
