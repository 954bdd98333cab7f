#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "statedb/types.hpp"

namespace statedb {

// Naive full-history worldstate: one immutable snapshot per block, built by
// copying the previous snapshot and applying the diff. Accounts are shared
// between snapshots until modified. Test and verification use only.
class ReferenceOracle {
public:
    struct Account {
        bool exists = false;
        Balance balance;
        Nonce nonce;
        Code code;
        std::map<StorageKey, StorageValue> slots; // zero values never stored
    };
    using Snapshot = std::map<Address, std::shared_ptr<const Account>>;

    ReferenceOracle();

    // Block 0 is the empty genesis state; diffs start at 1.
    void apply(const BlockDiff& diff);

    BlockNumber last_block() const noexcept { return snapshots_.size() - 1; }
    const Snapshot& at(BlockNumber b) const;

    Balance balance(const Address& a, BlockNumber b) const;
    Nonce nonce(const Address& a, BlockNumber b) const;
    Code code(const Address& a, BlockNumber b) const;
    bool exists(const Address& a, BlockNumber b) const;
    StorageValue storage(const Address& a, const StorageKey& k, BlockNumber b) const;

    // Every address ever touched, in sorted order.
    std::vector<Address> addresses() const;

private:
    const Account* find(const Address& a, BlockNumber b) const;

    std::vector<std::shared_ptr<const Snapshot>> snapshots_;
    std::set<Address> touched_;
};

} // namespace statedb
