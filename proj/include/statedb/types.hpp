#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "statedb/bytes.hpp"

namespace statedb {

struct AddressTag;
struct StorageKeyTag;
struct StorageValueTag;
struct BalanceTag;
struct HashTag;

using Address = FixedBytes<20, AddressTag>;
using StorageKey = FixedBytes<32, StorageKeyTag>;
// All-zero is the canonical "absent" value; writing it clears the slot.
using StorageValue = FixedBytes<32, StorageValueTag>;
// 16-byte unsigned integer, big-endian.
using Balance = FixedBytes<16, BalanceTag>;
using Hash32 = FixedBytes<32, HashTag>;

using AddressHash = FixedBytesHash<20, AddressTag>;
using StorageKeyHash = FixedBytesHash<32, StorageKeyTag>;
using Hash32Hash = FixedBytesHash<32, HashTag>;

using BlockNumber = std::uint64_t;
using RecordNumber = std::uint64_t;
using Reincarnation = std::uint32_t;
using Code = Bytes;

inline constexpr std::size_t kMaxCodeSize = 25600;

struct Nonce {
    std::uint64_t value = 0;
    constexpr auto operator<=>(const Nonce&) const = default;
};

unsigned __int128 balance_to_u128(const Balance& b) noexcept;
Balance balance_from_u128(unsigned __int128 v) noexcept;
std::string balance_to_decimal(const Balance& b);

struct AccountUpdate {
    Address address;
    bool created = false;
    bool deleted = false;
    std::optional<Balance> balance;
    std::optional<Nonce> nonce;
    std::optional<Code> code;
    std::vector<std::pair<StorageKey, StorageValue>> slots;

    bool operator==(const AccountUpdate&) const = default;
};

struct BlockDiff {
    BlockNumber block = 0;
    std::vector<AccountUpdate> updates;

    bool operator==(const BlockDiff&) const = default;
};

// Canonical change encoding that feeds the per-account archive hash.
// Layout: deleted u8, created u8, [present u8, balance 16], [present u8, nonce 8],
// [present u8, digest(code) 32], slot count u32, (key 32, value 32)* sorted by key.
// Absent optionals contribute only their zero presence byte.
Bytes serialize_update(const AccountUpdate& u);

// Throws ValidationError describing the first violated invariant.
void validate_update(const AccountUpdate& u);
void validate_diff(const BlockDiff& d);

// Sorts slots and updates into canonical order, then validates.
AccountUpdate canonicalize(AccountUpdate u);
BlockDiff canonicalize(BlockDiff d);

// Full-fidelity diff encoding (carries code bodies) used by workload files.
Bytes encode_block_diff(const BlockDiff& d);
BlockDiff decode_block_diff(ByteView in);

} // namespace statedb
