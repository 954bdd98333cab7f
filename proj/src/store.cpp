#include "statedb/store.hpp"

#include <cstring>

#include "statedb/digest.hpp"

namespace statedb {

namespace {

PoolConfig pool_config(std::filesystem::path file, std::size_t page_size, std::size_t pages)
{
    return PoolConfig{page_size, pages, std::move(file)};
}

std::filesystem::path tree_path(const std::filesystem::path& file)
{
    auto p = file;
    p += ".tree";
    return p;
}

std::uint64_t pages_for(std::uint64_t count, std::size_t slots_per_page)
{
    return (count + slots_per_page - 1) / slots_per_page;
}

} // namespace

Store::Store(std::filesystem::path file, std::size_t record_size, const StoreConfig& config, std::uint64_t count)
    : record_size_{record_size},
      slots_per_page_{record_size == 0 ? 0 : config.page_size / record_size},
      count_{count},
      pool_{pool_config(file, config.page_size, config.pool_pages)},
      tree_{pool_config(tree_path(file), config.page_size, config.tree_pool_pages), pages_for(count, slots_per_page_ == 0 ? 1 : slots_per_page_)}
{
    if (record_size == 0 || record_size > config.page_size) {
        throw FormatError("record size " + std::to_string(record_size) + " does not fit page size "
                          + std::to_string(config.page_size));
    }
    if (pool_.page_count() < pages_for(count_, slots_per_page_)) {
        throw CorruptionError(file.string() + " holds fewer pages than " + std::to_string(count_) + " records need");
    }
}

void Store::get(RecordNumber r, MutableByteView out)
{
    if (r >= count_) {
        throw BoundsError("record " + std::to_string(r) + " out of range (count " + std::to_string(count_) + ")");
    }
    if (out.size() != record_size_) {
        throw FormatError("output buffer size mismatch");
    }
    const auto loc = locate_record(r, slots_per_page_);
    const auto page = pool_.get_page(loc.page);
    std::memcpy(out.data(), page.data() + loc.slot * record_size_, record_size_);
}

Bytes Store::get(RecordNumber r)
{
    Bytes out(record_size_);
    get(r, out);
    return out;
}

void Store::set(RecordNumber r, ByteView record)
{
    if (record.size() != record_size_) {
        throw FormatError("record length " + std::to_string(record.size()) + " != record size "
                          + std::to_string(record_size_));
    }
    if (r > count_) {
        throw BoundsError("record " + std::to_string(r) + " beyond append position " + std::to_string(count_));
    }
    const auto loc = locate_record(r, slots_per_page_);
    const auto page = pool_.get_page_for_write(loc.page);
    std::memcpy(page.data() + loc.slot * record_size_, record.data(), record_size_);
    if (r == count_) {
        ++count_;
    }
    tree_.mark_leaf_dirty(loc.page);
}

ByteView Store::read_page(std::uint64_t leaf)
{
    return pool_.get_page(leaf);
}

Hash32 Store::root()
{
    return tree_.root([this](std::uint64_t leaf) { return read_page(leaf); });
}

void Store::flush()
{
    tree_.flush([this](std::uint64_t leaf) { return read_page(leaf); });
    pool_.flush();
}

Depot::Depot(const std::filesystem::path& meta_file, const std::filesystem::path& blob_file, const StoreConfig& config,
             std::uint64_t count, bool verify_reads)
    : meta_{meta_file, kMetaSize, config, count}, blob_{blob_file}, blob_size_{blob_.size()}, verify_reads_{verify_reads}
{
}

void Depot::set(RecordNumber r, const Code& code)
{
    if (code.size() > kMaxCodeSize) {
        throw FormatError("code of " + std::to_string(code.size()) + " bytes exceeds limit " + std::to_string(kMaxCodeSize));
    }
    if (r > meta_.count()) {
        throw BoundsError("depot record " + std::to_string(r) + " beyond append position");
    }
    const Hash32 h = digest(code);
    const std::uint64_t offset = blob_size_;
    if (!code.empty()) {
        blob_.write_at(offset, code);
        blob_size_ += code.size();
    }
    std::uint8_t rec[kMetaSize];
    put_be64(rec, offset);
    put_be32(rec + 8, static_cast<std::uint32_t>(code.size()));
    std::memcpy(rec + 12, h.data(), 32);
    meta_.set(r, ByteView{rec, kMetaSize});
}

void Depot::clear(RecordNumber r)
{
    std::uint8_t rec[kMetaSize] = {};
    meta_.set(r, ByteView{rec, kMetaSize});
}

Hash32 Depot::code_hash(RecordNumber r)
{
    std::uint8_t rec[kMetaSize];
    meta_.get(r, rec);
    return Hash32::from_view(ByteView{rec + 12, 32});
}

Code Depot::get(RecordNumber r)
{
    std::uint8_t rec[kMetaSize];
    meta_.get(r, rec);
    const std::uint64_t offset = get_be64(rec);
    const std::uint32_t length = get_be32(rec + 8);
    const auto stored = Hash32::from_view(ByteView{rec + 12, 32});
    if (length == 0 && stored.is_zero()) {
        return {};
    }
    if (offset + length > blob_size_) {
        throw CorruptionError("depot record " + std::to_string(r) + " points past blob end");
    }
    Code code(length);
    blob_.read_exact(offset, code);
    if (verify_reads_ && digest(code) != stored) {
        throw CorruptionError("depot record " + std::to_string(r) + " code hash mismatch");
    }
    return code;
}

void Depot::flush()
{
    meta_.flush();
}

} // namespace statedb
