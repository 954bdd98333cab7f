#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <filesystem>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "statedb/file.hpp"
#include "statedb/sorted_table.hpp"
#include "statedb/types.hpp"

namespace statedb {

struct ArchiveConfig {
    std::size_t queue_depth = 64;  // diffs waiting for the appender before append_block blocks
    std::size_t min_batch = 16;    // diffs the appender gathers before committing, capped by max_batch
    std::size_t max_batch = 64;    // diffs folded into one commit
    std::chrono::milliseconds linger{20};  // longest wait for min_batch once a diff is queued
    std::size_t merge_fanin = 8;   // runs of one level merged together
    bool sync = false;             // fdatasync runs before publishing
    bool read_only = false;        // no appender; serves a fixed snapshot
};

/// Append-only history of every attribute and slot change, kept in sorted
/// run tables and queried by floor search on block number.
///
/// append_block only enqueues. A background appender turns each diff into
/// log rows, computes the chained block hash, writes one run per table per
/// batch, then publishes the new watermark. Readers take the published
/// snapshot and never wait on the appender.
class ArchiveDb {
public:
    enum Table : std::size_t {
        Storage,     // account, reincarnation, key -> value
        BalanceLog,  // account -> balance
        NonceLog,    // account -> nonce
        CodeLog,     // account -> code hash (zero = no code)
        StateLog,    // account -> exists u8, reincarnation u32
        AccountHash, // account -> per-account chained hash
        CodeIndex,   // code hash -> blob offset u64, length u32
        kTableCount,
    };

    explicit ArchiveDb(std::filesystem::path dir, ArchiveConfig config = {});
    ~ArchiveDb();

    ArchiveDb(const ArchiveDb&) = delete;
    ArchiveDb& operator=(const ArchiveDb&) = delete;

    // Blocks while the queue is full.
    void append_block(BlockDiff diff);
    // Returns once everything enqueued so far is published.
    void wait_idle();
    void close();

    BlockNumber watermark() const;
    BlockNumber enqueued() const;

    StorageValue get_storage_at(const Address& a, const StorageKey& k, BlockNumber b) const;
    Balance get_balance_at(const Address& a, BlockNumber b) const;
    Nonce get_nonce_at(const Address& a, BlockNumber b) const;
    Code get_code_at(const Address& a, BlockNumber b) const;
    bool account_exists_at(const Address& a, BlockNumber b) const;
    Reincarnation reincarnation_at(const Address& a, BlockNumber b) const;
    Hash32 block_hash(BlockNumber b) const;
    // Zero hash when the account never changed at or before b.
    Hash32 account_hash_at(const Address& a, BlockNumber b) const;

    // Rows in the change tables (storage, balance, nonce, code, state).
    std::uint64_t entry_count() const;
    std::uint64_t run_count() const;
    std::vector<std::filesystem::path> run_files() const;

    // Rows one diff contributes to the change tables.
    static std::uint64_t change_count(const BlockDiff& diff);
    static const TableSchema& schema(Table t);

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    struct Published {
        BlockNumber watermark = 0;
        std::uint64_t next_seq = 0;
        std::array<RunList, kTableCount> tables;
    };

    struct AccountTrack {
        Reincarnation reincarnation = 0;
        Hash32 hash;
    };

    struct Batch {
        std::array<Bytes, kTableCount> rows;
        std::vector<Hash32> block_hashes;
        BlockNumber first = 0;
        BlockNumber last = 0;
    };

    std::shared_ptr<const Published> snapshot() const;
    std::shared_ptr<const Published> checked(BlockNumber b) const;
    void load();
    void appender_loop();
    void ingest(const BlockDiff& diff, Batch& batch);
    void commit(Batch& batch);
    void maybe_merge(Published& next, std::vector<std::filesystem::path>& obsolete);
    void write_manifest(const Published& p);
    std::filesystem::path run_path(Table t, std::uint64_t seq) const;
    void rethrow_failure() const;

    std::filesystem::path dir_;
    ArchiveConfig config_;
    File block_hashes_;
    File code_blob_;

    mutable std::mutex publish_mu_;
    std::shared_ptr<const Published> published_;

    // Appender-owned state.
    std::unordered_map<Address, AccountTrack, AddressHash> accounts_;
    std::unordered_map<Hash32, std::pair<std::uint64_t, std::uint32_t>, Hash32Hash> codes_;
    std::uint64_t blob_size_ = 0;
    Hash32 last_block_hash_;

    mutable std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::deque<BlockDiff> queue_;
    BlockNumber enqueued_ = 0;
    bool in_flight_ = false;
    std::size_t flush_waiters_ = 0;
    bool stopping_ = false;
    std::exception_ptr failure_;
    std::thread appender_;
};

} // namespace statedb
