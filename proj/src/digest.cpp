#include "statedb/digest.hpp"

// The EVP layer adds a provider dispatch per call that dominates 64-byte node hashes.
#define OPENSSL_SUPPRESS_DEPRECATED
#include <openssl/sha.h>

namespace statedb {

Hash32 digest(ByteView data)
{
    Hash32 out;
    SHA256_CTX ctx;
    SHA256_Init(&ctx);
    SHA256_Update(&ctx, data.data(), data.size());
    SHA256_Final(out.data(), &ctx);
    return out;
}

const Hash32& empty_digest()
{
    static const Hash32 h = digest(ByteView{});
    return h;
}

struct Hasher::Impl {
    SHA256_CTX ctx;
};

Hasher::Hasher() : impl_{std::make_unique<Impl>()}
{
    SHA256_Init(&impl_->ctx);
}

Hasher::~Hasher() = default;
Hasher::Hasher(Hasher&&) noexcept = default;
Hasher& Hasher::operator=(Hasher&&) noexcept = default;

Hasher& Hasher::update(ByteView data)
{
    SHA256_Update(&impl_->ctx, data.data(), data.size());
    return *this;
}

Hash32 Hasher::finish()
{
    Hash32 out;
    SHA256_Final(out.data(), &impl_->ctx);
    SHA256_Init(&impl_->ctx);
    return out;
}

} // namespace statedb
