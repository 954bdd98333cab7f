#include "statedb/live_db.hpp"

#include <cstring>

#include "statedb/digest.hpp"

namespace statedb {

namespace {

constexpr char kLiveMagic[8] = {'S', 'D', 'B', 'L', 'I', 'V', 'E', '1'};
constexpr std::uint32_t kLiveFormatVersion = 1;

StoreConfig store_config(std::size_t page_size, std::size_t pool_pages)
{
    return StoreConfig{page_size, pool_pages, std::max<std::size_t>(pool_pages / 4, 2)};
}

IndexerConfig indexer_config(std::size_t page_size, std::size_t pool_pages)
{
    IndexerConfig c;
    c.bucket_page_size = 4096;
    c.bucket_pool_pages = pool_pages;
    c.keys = store_config(page_size, pool_pages);
    return c;
}

const std::filesystem::path& ensure_dir(const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

SlotIndexKey make_slot_index_key(const Address& a, Reincarnation r, const StorageKey& k)
{
    SlotIndexKey key;
    std::memcpy(key.data(), a.data(), 20);
    put_be32(key.data() + 20, r);
    std::memcpy(key.data() + 24, k.data(), 32);
    return key;
}

LiveDb::Meta LiveDb::load_meta(const std::filesystem::path& dir, const LiveDbConfig& config)
{
    Meta m;
    m.page_size = config.page_size;
    const auto path = ensure_dir(dir) / "live.meta";
    if (!std::filesystem::exists(path)) {
        return m;
    }
    File f{path, File::Mode::ReadOnly};
    Bytes raw(f.size());
    f.read_exact(0, raw);
    ByteReader r{raw};
    if (std::memcmp(r.raw(8).data(), kLiveMagic, 8) != 0) {
        throw CorruptionError("bad live db magic in " + path.string());
    }
    if (const auto v = r.u32(); v != kLiveFormatVersion) {
        throw CorruptionError("unsupported live db format version " + std::to_string(v));
    }
    m.page_size = r.u32();
    m.current_block = r.u64();
    m.account_count = r.u64();
    m.slot_count = r.u64();
    return m;
}

LiveDb::LiveDb(std::filesystem::path dir, LiveDbConfig config) : LiveDb(dir, config, load_meta(dir, config)) {}

LiveDb::LiveDb(std::filesystem::path dir, LiveDbConfig config, Meta meta)
    : dir_{std::move(dir)},
      config_{config},
      page_size_{meta.page_size},
      current_block_{meta.current_block},
      balances_{dir_ / "balance.dat", 16, store_config(page_size_, config.pool_pages), meta.account_count},
      nonces_{dir_ / "nonce.dat", 8, store_config(page_size_, config.pool_pages), meta.account_count},
      exists_{dir_ / "exists.dat", 1, store_config(page_size_, config.pool_pages), meta.account_count},
      reincarnations_{dir_ / "reinc.dat", 4, store_config(page_size_, config.pool_pages), meta.account_count},
      codes_{dir_ / "code.meta", dir_ / "code.blob", store_config(page_size_, config.pool_pages), meta.account_count,
             config.verify_code_reads},
      values_{dir_ / "values.dat", 32, store_config(page_size_, config.pool_pages), meta.slot_count},
      accounts_{dir_, "accounts", 20, indexer_config(page_size_, config.pool_pages)},
      slots_{dir_, "slots", 56, indexer_config(page_size_, config.pool_pages)},
      account_cache_{config.cache_entries},
      slot_cache_{config.cache_entries}
{
    if (accounts_.count() != meta.account_count || slots_.count() != meta.slot_count) {
        throw CorruptionError("live db indexers disagree with metadata in " + dir_.string());
    }
    last_diff_.block = current_block_;
}

LiveDb::~LiveDb()
{
    try {
        flush();
    } catch (...) {
    }
}

std::optional<RecordNumber> LiveDb::find_account(const Address& a)
{
    if (auto hit = account_cache_.get(a)) {
        return hit;
    }
    auto found = accounts_.get(a.view());
    if (found) {
        account_cache_.put(a, *found);
    }
    return found;
}

std::optional<RecordNumber> LiveDb::find_slot(const SlotIndexKey& key)
{
    if (auto hit = slot_cache_.get(key)) {
        return hit;
    }
    auto found = slots_.get(key.view());
    if (found) {
        slot_cache_.put(key, *found);
    }
    return found;
}

RecordNumber LiveDb::add_account(const Address& a)
{
    const auto [ordinal, fresh] = accounts_.get_or_add(a.view());
    if (fresh) {
        const std::uint8_t zeros[16] = {};
        balances_.set(ordinal, ByteView{zeros, 16});
        nonces_.set(ordinal, ByteView{zeros, 8});
        exists_.set(ordinal, ByteView{zeros, 1});
        reincarnations_.set(ordinal, ByteView{zeros, 4});
        codes_.clear(ordinal);
    }
    account_cache_.put(a, ordinal);
    return ordinal;
}

Reincarnation LiveDb::read_reincarnation(RecordNumber account)
{
    std::uint8_t buf[4];
    reincarnations_.get(account, buf);
    return get_be32(buf);
}

Balance LiveDb::get_balance(const Address& a)
{
    Balance b;
    if (const auto ord = find_account(a)) {
        balances_.get(*ord, b.bytes);
    }
    return b;
}

Nonce LiveDb::get_nonce(const Address& a)
{
    if (const auto ord = find_account(a)) {
        std::uint8_t buf[8];
        nonces_.get(*ord, buf);
        return Nonce{get_be64(buf)};
    }
    return Nonce{};
}

Code LiveDb::get_code(const Address& a)
{
    if (const auto ord = find_account(a)) {
        return codes_.get(*ord);
    }
    return {};
}

bool LiveDb::account_exists(const Address& a)
{
    if (const auto ord = find_account(a)) {
        std::uint8_t flag = 0;
        exists_.get(*ord, MutableByteView{&flag, 1});
        return flag != 0;
    }
    return false;
}

Reincarnation LiveDb::get_reincarnation(const Address& a)
{
    if (const auto ord = find_account(a)) {
        return read_reincarnation(*ord);
    }
    return 0;
}

StorageValue LiveDb::get_storage(const Address& a, const StorageKey& k)
{
    StorageValue v;
    const auto ord = find_account(a);
    if (!ord) {
        return v;
    }
    if (const auto slot = find_slot(make_slot_index_key(a, read_reincarnation(*ord), k))) {
        values_.get(*slot, v.bytes);
    }
    return v;
}

void LiveDb::write_slot(const Address& a, Reincarnation reinc, const StorageKey& k, const StorageValue& v)
{
    const SlotIndexKey key = make_slot_index_key(a, reinc, k);
    if (v.is_zero()) {
        // Clearing a slot that was never written allocates nothing.
        if (const auto slot = find_slot(key)) {
            values_.set(*slot, v.view());
        }
        return;
    }
    std::optional<RecordNumber> slot = slot_cache_.get(key);
    if (!slot) {
        const auto [ordinal, fresh] = slots_.get_or_add(key.view());
        (void)fresh;
        slot = ordinal;
        slot_cache_.put(key, ordinal);
    }
    values_.set(*slot, v.view());
}

void LiveDb::apply_block(BlockDiff diff)
{
    if (diff.block != current_block_ + 1) {
        throw SequencingError("live db expects block " + std::to_string(current_block_ + 1) + ", got "
                              + std::to_string(diff.block));
    }
    BlockDiff canonical = canonicalize(std::move(diff));

    for (const auto& u : canonical.updates) {
        if (u.deleted) {
            const auto ord = find_account(u.address);
            if (!ord) {
                continue; // nothing stored for an unknown account
            }
            std::uint8_t buf[16] = {};
            put_be32(buf, read_reincarnation(*ord) + 1);
            reincarnations_.set(*ord, ByteView{buf, 4});
            std::memset(buf, 0, sizeof(buf));
            exists_.set(*ord, ByteView{buf, 1});
            balances_.set(*ord, ByteView{buf, 16});
            nonces_.set(*ord, ByteView{buf, 8});
            codes_.clear(*ord);
            continue;
        }

        const RecordNumber ord = add_account(u.address);
        if (u.created) {
            const std::uint8_t one = 1;
            exists_.set(ord, ByteView{&one, 1});
        }
        if (u.balance) {
            balances_.set(ord, u.balance->view());
        }
        if (u.nonce) {
            std::uint8_t buf[8];
            put_be64(buf, u.nonce->value);
            nonces_.set(ord, ByteView{buf, 8});
        }
        if (u.code) {
            codes_.set(ord, *u.code);
        }
        if (!u.slots.empty()) {
            const Reincarnation reinc = read_reincarnation(ord);
            for (const auto& [k, v] : u.slots) {
                write_slot(u.address, reinc, k, v);
            }
        }
    }

    last_diff_ = std::move(canonical);
    current_block_ = last_diff_.block;
    cached_root_.reset();
}

std::array<Hash32, kComponentCount> LiveDb::component_hashes()
{
    return {
        balances_.root(), nonces_.root(), exists_.root(), reincarnations_.root(),
        codes_.root(),    values_.root(), accounts_.hash(), slots_.hash(),
    };
}

WorldstateRoot LiveDb::state_root()
{
    if (cached_root_ && cached_root_->block == current_block_) {
        return *cached_root_;
    }
    const auto parts = component_hashes();
    std::uint8_t buf[32 * kComponentCount];
    for (std::size_t i = 0; i < kComponentCount; ++i) {
        std::memcpy(buf + 32 * i, parts[i].data(), 32);
    }
    cached_root_ = WorldstateRoot{digest(ByteView{buf, sizeof(buf)}), current_block_};
    ++composite_digests_;
    return *cached_root_;
}

std::uint64_t LiveDb::digest_count() const noexcept
{
    return balances_.tree().digest_count() + nonces_.tree().digest_count() + exists_.tree().digest_count()
           + reincarnations_.tree().digest_count() + codes_.meta().tree().digest_count() + values_.tree().digest_count()
           + accounts_.digest_count() + slots_.digest_count() + composite_digests_;
}

void LiveDb::write_meta()
{
    ByteWriter w;
    w.raw(ByteView{reinterpret_cast<const std::uint8_t*>(kLiveMagic), 8});
    w.u32(kLiveFormatVersion);
    w.u32(static_cast<std::uint32_t>(page_size_));
    w.u64(current_block_);
    w.u64(accounts_.count());
    w.u64(slots_.count());
    File f{dir_ / "live.meta"};
    f.truncate(0);
    f.write_at(0, w.bytes());
}

void LiveDb::flush()
{
    balances_.flush();
    nonces_.flush();
    exists_.flush();
    reincarnations_.flush();
    codes_.flush();
    values_.flush();
    accounts_.flush();
    slots_.flush();
    write_meta();
}

} // namespace statedb
