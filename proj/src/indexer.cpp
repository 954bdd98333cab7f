#include "statedb/indexer.hpp"

#include <cstring>

#include "statedb/digest.hpp"

namespace statedb {

namespace {

constexpr char kIndexMagic[8] = {'S', 'D', 'B', 'I', 'D', 'X', '0', '1'};

std::filesystem::path with_suffix(const std::filesystem::path& dir, const std::string& name, const char* suffix)
{
    return dir / (name + suffix);
}

} // namespace

LinearHashTable::LinearHashTable(const std::filesystem::path& bucket_file, const std::filesystem::path& overflow_file,
                                 std::size_t key_width, std::size_t page_size, std::size_t pool_pages, State state)
    : key_width_{key_width},
      slot_size_{key_width + 8},
      slots_per_page_{page_size > kHeaderSize ? (page_size - kHeaderSize) / (key_width + 8) : 0},
      primary_{PoolConfig{page_size, pool_pages, bucket_file}},
      overflow_{PoolConfig{page_size, std::max<std::size_t>(pool_pages / 4, 2), overflow_file}},
      state_{std::move(state)}
{
    if (slots_per_page_ == 0) {
        throw FormatError("bucket page size " + std::to_string(page_size) + " cannot hold a " + std::to_string(key_width)
                          + "-byte key");
    }
    if (primary_.page_count() == 0) {
        primary_.get_page_for_write(0);
    }
    if (primary_.page_count() != bucket_count() || overflow_.page_count() < state_.overflow_pages) {
        throw CorruptionError("linear hash files disagree with stored state: " + bucket_file.string());
    }
}

std::uint64_t LinearHashTable::key_hash(ByteView key)
{
    return get_be64(digest(key).data());
}

std::uint64_t LinearHashTable::bucket_of(std::uint64_t h) const noexcept
{
    std::uint64_t b = h & ((std::uint64_t{1} << state_.level) - 1);
    if (b < state_.split) {
        b = h & ((std::uint64_t{1} << (state_.level + 1)) - 1);
    }
    return b;
}

MutableByteView LinearHashTable::page(PageRef ref, bool for_write)
{
    PagePool& pool = ref.overflow ? overflow_ : primary_;
    return for_write ? pool.get_page_for_write(ref.id) : pool.get_page(ref.id);
}

std::optional<std::uint64_t> LinearHashTable::find(ByteView key)
{
    PageRef ref{false, bucket_of(key_hash(key))};
    for (;;) {
        const auto p = page(ref, false);
        const std::uint32_t n = get_be32(p.data());
        const std::uint8_t* slot = p.data() + kHeaderSize;
        for (std::uint32_t i = 0; i < n; ++i, slot += slot_size_) {
            if (std::memcmp(slot, key.data(), key_width_) == 0) {
                return get_be64(slot + key_width_);
            }
        }
        const std::uint64_t next = get_be64(p.data() + 8);
        if (next == 0) {
            return std::nullopt;
        }
        ref = PageRef{true, next - 1};
    }
}

std::uint64_t LinearHashTable::allocate_overflow()
{
    std::uint64_t id;
    if (!state_.free_overflow.empty()) {
        id = state_.free_overflow.back();
        state_.free_overflow.pop_back();
    } else {
        id = state_.overflow_pages++;
    }
    const auto p = overflow_.get_page_for_write(id);
    std::fill(p.begin(), p.end(), 0);
    return id;
}

void LinearHashTable::append_to_bucket(std::uint64_t bucket, ByteView key, std::uint64_t value)
{
    PageRef ref{false, bucket};
    for (;;) {
        auto p = page(ref, false);
        const std::uint32_t n = get_be32(p.data());
        if (n < slots_per_page_) {
            p = page(ref, true);
            std::uint8_t* slot = p.data() + kHeaderSize + n * slot_size_;
            std::memcpy(slot, key.data(), key_width_);
            put_be64(slot + key_width_, value);
            put_be32(p.data(), n + 1);
            return;
        }
        const std::uint64_t next = get_be64(p.data() + 8);
        if (next != 0) {
            ref = PageRef{true, next - 1};
            continue;
        }
        const std::uint64_t fresh = allocate_overflow();
        put_be64(page(ref, true).data() + 8, fresh + 1);
        ref = PageRef{true, fresh};
    }
}

void LinearHashTable::insert(ByteView key, std::uint64_t value)
{
    if (key.size() != key_width_) {
        throw FormatError("key width " + std::to_string(key.size()) + " != " + std::to_string(key_width_));
    }
    append_to_bucket(bucket_of(key_hash(key)), key, value);
    ++state_.count;
    const double capacity = static_cast<double>(bucket_count()) * static_cast<double>(slots_per_page_);
    if (static_cast<double>(state_.count) > kMaxLoad * capacity) {
        split();
    }
}

void LinearHashTable::split()
{
    const std::uint64_t source = state_.split;
    const std::uint64_t target = (std::uint64_t{1} << state_.level) + source;

    std::vector<std::uint8_t> entries;
    std::vector<std::uint64_t> chain;
    PageRef ref{false, source};
    for (;;) {
        const auto p = page(ref, false);
        const std::uint32_t n = get_be32(p.data());
        entries.insert(entries.end(), p.data() + kHeaderSize, p.data() + kHeaderSize + n * slot_size_);
        const std::uint64_t next = get_be64(p.data() + 8);
        if (next == 0) {
            break;
        }
        chain.push_back(next - 1);
        ref = PageRef{true, next - 1};
    }

    // Reset the source chain; its overflow pages go back to the free list,
    // newest first so reuse order stays deterministic.
    {
        const auto p = page(PageRef{false, source}, true);
        std::fill(p.begin(), p.end(), 0);
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        state_.free_overflow.push_back(*it);
    }
    primary_.get_page_for_write(target); // target == page_count: fresh zero page

    ++state_.split;
    if (state_.split == (std::uint64_t{1} << state_.level)) {
        ++state_.level;
        state_.split = 0;
    }

    for (std::size_t off = 0; off < entries.size(); off += slot_size_) {
        const ByteView key{entries.data() + off, key_width_};
        append_to_bucket(bucket_of(key_hash(key)), key, get_be64(entries.data() + off + key_width_));
    }
}

void LinearHashTable::flush()
{
    primary_.flush();
    overflow_.flush();
}

Indexer::Indexer(const std::filesystem::path& dir, const std::string& name, std::size_t key_width,
                 const IndexerConfig& config)
    : key_width_{key_width},
      meta_path_{with_suffix(dir, name, ".meta")},
      table_{with_suffix(dir, name, ".buckets"), with_suffix(dir, name, ".overflow"), key_width,
             config.bucket_page_size, config.bucket_pool_pages, load_state(meta_path_, key_width)},
      keys_{with_suffix(dir, name, ".keys"), key_width, config.keys, table_.state().count}
{
}

LinearHashTable::State Indexer::load_state(const std::filesystem::path& meta, std::size_t key_width)
{
    LinearHashTable::State st;
    if (!std::filesystem::exists(meta)) {
        return st;
    }
    File f{meta, File::Mode::ReadOnly};
    Bytes raw(f.size());
    f.read_exact(0, raw);
    ByteReader r{raw};
    const auto magic = r.raw(8);
    if (std::memcmp(magic.data(), kIndexMagic, 8) != 0) {
        throw CorruptionError("bad indexer metadata magic in " + meta.string());
    }
    if (r.u32() != key_width) {
        throw CorruptionError("indexer key width mismatch in " + meta.string());
    }
    st.level = r.u32();
    st.split = r.u64();
    st.count = r.u64();
    st.overflow_pages = r.u64();
    const std::uint64_t free_count = r.u64();
    for (std::uint64_t i = 0; i < free_count; ++i) {
        st.free_overflow.push_back(r.u64());
    }
    return st;
}

std::pair<RecordNumber, bool> Indexer::get_or_add(ByteView key)
{
    if (auto found = get(key)) {
        return {*found, false};
    }
    const RecordNumber ordinal = table_.state().count;
    table_.insert(key, ordinal);
    keys_.set(ordinal, key);
    return {ordinal, true};
}

std::optional<RecordNumber> Indexer::get(ByteView key)
{
    if (key.size() != key_width_) {
        throw FormatError("key width " + std::to_string(key.size()) + " != " + std::to_string(key_width_));
    }
    return table_.find(key);
}

Bytes Indexer::key_at(RecordNumber r)
{
    return keys_.get(r);
}

void Indexer::flush()
{
    table_.flush();
    keys_.flush();

    const auto& st = table_.state();
    ByteWriter w;
    w.raw(ByteView{reinterpret_cast<const std::uint8_t*>(kIndexMagic), 8});
    w.u32(static_cast<std::uint32_t>(key_width_));
    w.u32(st.level);
    w.u64(st.split);
    w.u64(st.count);
    w.u64(st.overflow_pages);
    w.u64(st.free_overflow.size());
    for (const auto id : st.free_overflow) {
        w.u64(id);
    }
    File f{meta_path_};
    f.truncate(0);
    f.write_at(0, w.bytes());
}

} // namespace statedb
