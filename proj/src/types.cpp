#include "statedb/types.hpp"

#include <algorithm>

#include "statedb/digest.hpp"

namespace statedb {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c)
{
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    if (c >= 'A' && c <= 'F') {
        return c - 'A' + 10;
    }
    return -1;
}

bool slots_strictly_sorted(const AccountUpdate& u)
{
    return std::adjacent_find(u.slots.begin(), u.slots.end(),
                              [](const auto& a, const auto& b) { return !(a.first < b.first); })
           == u.slots.end();
}

// Flag bits of the workload diff encoding.
constexpr std::uint8_t kFlagDeleted = 1;
constexpr std::uint8_t kFlagCreated = 2;
constexpr std::uint8_t kFlagBalance = 4;
constexpr std::uint8_t kFlagNonce = 8;
constexpr std::uint8_t kFlagCode = 16;

} // namespace

std::string to_hex(ByteView bytes)
{
    std::string out = "0x";
    out.reserve(2 + bytes.size() * 2);
    for (const auto b : bytes) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0xf]);
    }
    return out;
}

Bytes bytes_from_hex(std::string_view hex)
{
    if (hex.starts_with("0x") || hex.starts_with("0X")) {
        hex.remove_prefix(2);
    }
    Bytes out;
    out.reserve((hex.size() + 1) / 2);
    std::size_t i = 0;
    if (hex.size() % 2 == 1) {
        const int v = hex_value(hex[0]);
        if (v < 0) {
            throw FormatError("invalid hex digit");
        }
        out.push_back(static_cast<std::uint8_t>(v));
        i = 1;
    }
    for (; i < hex.size(); i += 2) {
        const int hi = hex_value(hex[i]);
        const int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) {
            throw FormatError("invalid hex digit");
        }
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

unsigned __int128 balance_to_u128(const Balance& b) noexcept
{
    unsigned __int128 v = 0;
    for (const auto byte : b.bytes) {
        v = (v << 8) | byte;
    }
    return v;
}

Balance balance_from_u128(unsigned __int128 v) noexcept
{
    Balance b;
    for (int i = 15; i >= 0; --i) {
        b.bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
        v >>= 8;
    }
    return b;
}

std::string balance_to_decimal(const Balance& b)
{
    unsigned __int128 v = balance_to_u128(b);
    if (v == 0) {
        return "0";
    }
    std::string out;
    while (v != 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

Bytes serialize_update(const AccountUpdate& u)
{
    ByteWriter w;
    w.bytes().reserve(64 + u.slots.size() * 64);
    w.u8(u.deleted ? 1 : 0);
    w.u8(u.created ? 1 : 0);
    w.u8(u.balance ? 1 : 0);
    if (u.balance) {
        w.raw(u.balance->view());
    }
    w.u8(u.nonce ? 1 : 0);
    if (u.nonce) {
        w.u64(u.nonce->value);
    }
    w.u8(u.code ? 1 : 0);
    if (u.code) {
        w.raw(digest(*u.code).view());
    }
    w.u32(static_cast<std::uint32_t>(u.slots.size()));

    auto emit = [&w](const std::pair<StorageKey, StorageValue>& slot) {
        w.raw(slot.first.view());
        w.raw(slot.second.view());
    };
    if (slots_strictly_sorted(u)) {
        std::for_each(u.slots.begin(), u.slots.end(), emit);
    } else {
        auto sorted = u.slots;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::for_each(sorted.begin(), sorted.end(), emit);
    }
    return w.take();
}

void validate_update(const AccountUpdate& u)
{
    const std::string who = "account " + u.address.hex() + ": ";
    if (u.created && u.deleted) {
        throw ValidationError(who + "update is both created and deleted");
    }
    if (u.deleted && (u.balance || u.nonce || u.code || !u.slots.empty())) {
        throw ValidationError(who + "deletion carries attribute or slot changes");
    }
    if (u.code && u.code->size() > kMaxCodeSize) {
        throw ValidationError(who + "code exceeds " + std::to_string(kMaxCodeSize) + " bytes");
    }
    if (!slots_strictly_sorted(u)) {
        throw ValidationError(who + "slots not strictly sorted by key");
    }
}

void validate_diff(const BlockDiff& d)
{
    for (std::size_t i = 0; i < d.updates.size(); ++i) {
        if (i > 0 && !(d.updates[i - 1].address < d.updates[i].address)) {
            throw ValidationError("block " + std::to_string(d.block)
                                  + ": updates not strictly sorted by address (duplicate or out of order at "
                                  + d.updates[i].address.hex() + ")");
        }
        validate_update(d.updates[i]);
    }
}

AccountUpdate canonicalize(AccountUpdate u)
{
    std::stable_sort(u.slots.begin(), u.slots.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    validate_update(u);
    return u;
}

BlockDiff canonicalize(BlockDiff d)
{
    std::stable_sort(d.updates.begin(), d.updates.end(),
                     [](const auto& a, const auto& b) { return a.address < b.address; });
    for (auto& u : d.updates) {
        u = canonicalize(std::move(u));
    }
    validate_diff(d);
    return d;
}

Bytes encode_block_diff(const BlockDiff& d)
{
    ByteWriter w;
    w.u64(d.block);
    w.u32(static_cast<std::uint32_t>(d.updates.size()));
    for (const auto& u : d.updates) {
        w.raw(u.address.view());
        std::uint8_t flags = 0;
        flags |= u.deleted ? kFlagDeleted : 0;
        flags |= u.created ? kFlagCreated : 0;
        flags |= u.balance ? kFlagBalance : 0;
        flags |= u.nonce ? kFlagNonce : 0;
        flags |= u.code ? kFlagCode : 0;
        w.u8(flags);
        if (u.balance) {
            w.raw(u.balance->view());
        }
        if (u.nonce) {
            w.u64(u.nonce->value);
        }
        if (u.code) {
            w.u32(static_cast<std::uint32_t>(u.code->size()));
            w.raw(*u.code);
        }
        w.u32(static_cast<std::uint32_t>(u.slots.size()));
        for (const auto& [k, v] : u.slots) {
            w.raw(k.view());
            w.raw(v.view());
        }
    }
    return w.take();
}

BlockDiff decode_block_diff(ByteView in)
{
    ByteReader r{in};
    BlockDiff d;
    d.block = r.u64();
    const std::uint32_t n = r.u32();
    // Every update needs at least 25 bytes; reject absurd counts before reserving.
    if (n > r.remaining() / 25) {
        throw ParseError("block diff: update count " + std::to_string(n) + " exceeds payload");
    }
    d.updates.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        AccountUpdate u;
        u.address = r.fixed<Address>();
        const std::uint8_t flags = r.u8();
        if ((flags & ~(kFlagDeleted | kFlagCreated | kFlagBalance | kFlagNonce | kFlagCode)) != 0) {
            throw ParseError("block diff: unknown flag bits");
        }
        u.deleted = (flags & kFlagDeleted) != 0;
        u.created = (flags & kFlagCreated) != 0;
        if ((flags & kFlagBalance) != 0) {
            u.balance = r.fixed<Balance>();
        }
        if ((flags & kFlagNonce) != 0) {
            u.nonce = Nonce{r.u64()};
        }
        if ((flags & kFlagCode) != 0) {
            const std::uint32_t len = r.u32();
            if (len > kMaxCodeSize) {
                throw ParseError("block diff: code length " + std::to_string(len) + " too large");
            }
            const auto body = r.raw(len);
            u.code = Code(body.begin(), body.end());
        }
        const std::uint32_t slots = r.u32();
        if (slots > r.remaining() / 64) {
            throw ParseError("block diff: slot count exceeds payload");
        }
        u.slots.reserve(slots);
        for (std::uint32_t s = 0; s < slots; ++s) {
            auto k = r.fixed<StorageKey>();
            auto v = r.fixed<StorageValue>();
            u.slots.emplace_back(k, v);
        }
        d.updates.push_back(std::move(u));
    }
    if (!r.done()) {
        throw ParseError("block diff: trailing bytes");
    }
    return d;
}

} // namespace statedb
