#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statedb/errors.hpp"

namespace statedb {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using MutableByteView = std::span<std::uint8_t>;

std::string to_hex(ByteView bytes);

// Accepts an optional 0x prefix. Odd digit counts are allowed.
Bytes bytes_from_hex(std::string_view hex);

// Fixed-width opaque byte string. Tag keeps Address, StorageKey, etc. distinct.
template <std::size_t N, typename Tag>
struct FixedBytes {
    static constexpr std::size_t kSize = N;

    std::array<std::uint8_t, N> bytes{};

    constexpr auto operator<=>(const FixedBytes&) const = default;

    bool is_zero() const noexcept
    {
        return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
    }

    ByteView view() const noexcept { return {bytes.data(), N}; }
    const std::uint8_t* data() const noexcept { return bytes.data(); }
    std::uint8_t* data() noexcept { return bytes.data(); }

    std::string hex() const { return to_hex(view()); }

    static FixedBytes from_view(ByteView in)
    {
        FixedBytes out;
        if (in.size() != N) {
            throw FormatError("fixed bytes: expected " + std::to_string(N) + " bytes, got "
                                        + std::to_string(in.size()));
        }
        std::memcpy(out.bytes.data(), in.data(), N);
        return out;
    }

    // Numeric-style parse: short inputs are right-aligned, so "0x123" is ...000123.
    static FixedBytes from_hex(std::string_view hex)
    {
        const Bytes raw = bytes_from_hex(hex);
        if (raw.size() > N) {
            throw FormatError("fixed bytes: hex value wider than " + std::to_string(N) + " bytes");
        }
        FixedBytes out;
        std::copy(raw.begin(), raw.end(), out.bytes.begin() + static_cast<std::ptrdiff_t>(N - raw.size()));
        return out;
    }

    static FixedBytes from_u64(std::uint64_t v)
    {
        FixedBytes out;
        for (std::size_t i = 0; i < 8 && i < N; ++i) {
            out.bytes[N - 1 - i] = static_cast<std::uint8_t>(v >> (8 * i));
        }
        return out;
    }
};

template <std::size_t N, typename Tag>
struct FixedBytesHash {
    std::size_t operator()(const FixedBytes<N, Tag>& v) const noexcept
    {
        std::uint64_t h = 0;
        std::memcpy(&h, v.bytes.data() + (N >= 8 ? N - 8 : 0), std::min<std::size_t>(8, N));
        return static_cast<std::size_t>(h * 0x9e3779b97f4a7c15ULL);
    }
};

// Big-endian fixed-width integer codecs.
inline void put_be64(std::uint8_t* out, std::uint64_t v) noexcept
{
    for (int i = 7; i >= 0; --i) {
        out[i] = static_cast<std::uint8_t>(v);
        v >>= 8;
    }
}

inline void put_be32(std::uint8_t* out, std::uint32_t v) noexcept
{
    for (int i = 3; i >= 0; --i) {
        out[i] = static_cast<std::uint8_t>(v);
        v >>= 8;
    }
}

inline std::uint64_t get_be64(const std::uint8_t* in) noexcept
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | in[i];
    }
    return v;
}

inline std::uint32_t get_be32(const std::uint8_t* in) noexcept
{
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v = (v << 8) | in[i];
    }
    return v;
}

// Append-only big-endian writer used by the serializers.
class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }

    void u32(std::uint32_t v)
    {
        std::uint8_t b[4];
        put_be32(b, v);
        out_.insert(out_.end(), b, b + 4);
    }

    void u64(std::uint64_t v)
    {
        std::uint8_t b[8];
        put_be64(b, v);
        out_.insert(out_.end(), b, b + 8);
    }

    void raw(ByteView v) { out_.insert(out_.end(), v.begin(), v.end()); }

    Bytes& bytes() noexcept { return out_; }
    Bytes take() noexcept { return std::move(out_); }

private:
    Bytes out_;
};

// Bounds-checked big-endian reader; truncation raises ParseError.
class ByteReader {
public:
    explicit ByteReader(ByteView in) noexcept : in_{in} {}

    std::uint8_t u8()
    {
        need(1);
        return in_[pos_++];
    }

    std::uint32_t u32()
    {
        need(4);
        const auto v = get_be32(in_.data() + pos_);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64()
    {
        need(8);
        const auto v = get_be64(in_.data() + pos_);
        pos_ += 8;
        return v;
    }

    ByteView raw(std::size_t n)
    {
        need(n);
        const auto v = in_.subspan(pos_, n);
        pos_ += n;
        return v;
    }

    template <typename T>
    T fixed()
    {
        return T::from_view(raw(T::kSize));
    }

    std::size_t remaining() const noexcept { return in_.size() - pos_; }
    bool done() const noexcept { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n) {
            throw ParseError("truncated input: need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_));
        }
    }

    ByteView in_;
    std::size_t pos_ = 0;
};

} // namespace statedb
