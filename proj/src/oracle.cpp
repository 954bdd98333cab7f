#include "statedb/oracle.hpp"

namespace statedb {

ReferenceOracle::ReferenceOracle()
{
    snapshots_.push_back(std::make_shared<const Snapshot>());
}

void ReferenceOracle::apply(const BlockDiff& diff)
{
    if (diff.block != last_block() + 1) {
        throw SequencingError("oracle expects block " + std::to_string(last_block() + 1) + ", got "
                              + std::to_string(diff.block));
    }
    const BlockDiff canonical = canonicalize(diff);
    auto next = std::make_shared<Snapshot>(*snapshots_.back());
    for (const auto& u : canonical.updates) {
        touched_.insert(u.address);
        if (u.deleted) {
            next->erase(u.address);
            continue;
        }
        Account acc;
        if (auto it = next->find(u.address); it != next->end()) {
            acc = *it->second;
        }
        if (u.created) {
            acc.exists = true;
        }
        if (u.balance) {
            acc.balance = *u.balance;
        }
        if (u.nonce) {
            acc.nonce = *u.nonce;
        }
        if (u.code) {
            acc.code = *u.code;
        }
        for (const auto& [k, v] : u.slots) {
            if (v.is_zero()) {
                acc.slots.erase(k);
            } else {
                acc.slots[k] = v;
            }
        }
        (*next)[u.address] = std::make_shared<const Account>(std::move(acc));
    }
    snapshots_.push_back(std::move(next));
}

const ReferenceOracle::Snapshot& ReferenceOracle::at(BlockNumber b) const
{
    if (b >= snapshots_.size()) {
        throw BoundsError("oracle has no block " + std::to_string(b));
    }
    return *snapshots_[b];
}

const ReferenceOracle::Account* ReferenceOracle::find(const Address& a, BlockNumber b) const
{
    const auto& snap = at(b);
    const auto it = snap.find(a);
    return it == snap.end() ? nullptr : it->second.get();
}

Balance ReferenceOracle::balance(const Address& a, BlockNumber b) const
{
    const auto* acc = find(a, b);
    return acc ? acc->balance : Balance{};
}

Nonce ReferenceOracle::nonce(const Address& a, BlockNumber b) const
{
    const auto* acc = find(a, b);
    return acc ? acc->nonce : Nonce{};
}

Code ReferenceOracle::code(const Address& a, BlockNumber b) const
{
    const auto* acc = find(a, b);
    return acc ? acc->code : Code{};
}

bool ReferenceOracle::exists(const Address& a, BlockNumber b) const
{
    const auto* acc = find(a, b);
    return acc != nullptr && acc->exists;
}

StorageValue ReferenceOracle::storage(const Address& a, const StorageKey& k, BlockNumber b) const
{
    const auto* acc = find(a, b);
    if (acc == nullptr) {
        return {};
    }
    const auto it = acc->slots.find(k);
    return it == acc->slots.end() ? StorageValue{} : it->second;
}

std::vector<Address> ReferenceOracle::addresses() const
{
    return {touched_.begin(), touched_.end()};
}

} // namespace statedb
