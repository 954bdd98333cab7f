#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <vector>

#include "statedb/types.hpp"

namespace statedb {

struct WorkloadSpec {
    std::uint64_t seed = 1;
    std::uint64_t blocks = 1000;
    std::uint64_t accounts = 10000;
    std::uint32_t txs_per_block = 50;
    std::uint32_t slot_writes_per_tx = 4;
    double new_key_ratio = 0.3;  // slot writes that allocate a fresh key
    double delete_ratio = 0.002; // per transaction chance of one account deletion

    void validate() const;
};

struct WorkloadBlock {
    BlockDiff diff;
    std::uint32_t tx_count = 0;
};

// Zipf-distributed ranks in [0, n) with P(r) proportional to 1 / (r + 1)^s.
class ZipfSampler {
public:
    ZipfSampler(std::uint64_t n, double s);
    std::uint64_t operator()(std::mt19937_64& rng) const;

private:
    std::vector<double> cdf_;
};

// Uniform integer in [0, n); portable across standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);
// Uniform double in [0, 1) from the top 53 bits.
double uniform_unit(std::mt19937_64& rng);

Address workload_address(std::uint64_t seed, std::uint64_t index);
StorageKey workload_key(const Address& a, std::uint64_t index);

/// Synthetic transaction stream. Each transaction moves value from a
/// Zipf-popular sender to a uniformly chosen receiver and writes storage
/// slots of the receiver. Transactions of one block fold into one diff.
/// Deleted accounts are chosen with the same skew, so they tend to be
/// recreated later.
class WorkloadGenerator {
public:
    explicit WorkloadGenerator(WorkloadSpec spec);

    bool done() const noexcept { return next_block_ > spec_.blocks; }
    WorkloadBlock next();

    const WorkloadSpec& spec() const noexcept { return spec_; }

private:
    struct AccountState {
        bool exists = false;
        unsigned __int128 balance = 0;
        std::uint64_t nonce = 0;
        std::uint64_t keys = 0;
    };

    AccountUpdate& touch(std::vector<AccountUpdate*>& order, std::uint64_t index);

    WorkloadSpec spec_;
    std::mt19937_64 rng_;
    ZipfSampler popularity_;
    std::vector<Address> addresses_;
    std::vector<AccountState> state_;
    std::vector<Code> code_pool_;
    BlockNumber next_block_ = 1;

    // Per-block scratch.
    std::vector<std::optional<AccountUpdate>> pending_;
    std::vector<std::uint64_t> touched_;
};

std::vector<WorkloadBlock> generate_workload(const WorkloadSpec& spec);

// File layout: magic "SDBWORK1", block count u64 BE, then per block
// length u32 BE, tx count u32 BE, encoded diff of that length.
void write_workload(const std::filesystem::path& path, const WorkloadSpec& spec);
void write_workload(const std::filesystem::path& path, const std::vector<WorkloadBlock>& blocks);

class WorkloadReader {
public:
    explicit WorkloadReader(const std::filesystem::path& path);

    std::uint64_t block_count() const noexcept { return count_; }
    // Throws ParseError on truncated or malformed records.
    std::optional<WorkloadBlock> next();

private:
    std::ifstream in_;
    std::filesystem::path path_;
    std::uint64_t count_ = 0;
    std::uint64_t read_ = 0;
};

std::vector<WorkloadBlock> read_workload(const std::filesystem::path& path);

} // namespace statedb
