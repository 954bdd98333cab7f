#pragma once

#include <memory>

#include "statedb/types.hpp"

namespace statedb {

// Every hash in the engine goes through this seam (SHA-256).
Hash32 digest(ByteView data);

inline Hash32 digest(const Hash32& a, const Hash32& b)
{
    std::uint8_t buf[64];
    std::memcpy(buf, a.data(), 32);
    std::memcpy(buf + 32, b.data(), 32);
    return digest(ByteView{buf, 64});
}

// digest of the empty byte string
const Hash32& empty_digest();

class Hasher {
public:
    Hasher();
    ~Hasher();
    Hasher(Hasher&&) noexcept;
    Hasher& operator=(Hasher&&) noexcept;

    Hasher& update(ByteView data);
    Hasher& update(const Hash32& h) { return update(h.view()); }
    Hash32 finish();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace statedb
