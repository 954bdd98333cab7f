#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "statedb/file.hpp"

namespace statedb {

using PageId = std::uint64_t;

struct PoolConfig {
    std::size_t page_size = 4096;
    std::size_t capacity = 1024; // resident pages
    std::filesystem::path file_path;
};

struct PoolStats {
    std::uint64_t hits = 0;
    std::uint64_t loads = 0;
    std::uint64_t evictions = 0;
    std::uint64_t writes = 0;
};

// Fixed-size pages over one backing file; page i lives at offset i * page_size.
// A bounded number of pages stay resident, LRU-evicted with write-back of
// dirty pages. Pages never written read back as zeros.
//
// Spans returned by get_page stay valid until the next call on the pool.
class PagePool {
public:
    explicit PagePool(PoolConfig config);
    ~PagePool();

    PagePool(PagePool&&) = delete;
    PagePool& operator=(PagePool&&) = delete;

    // id may equal page_count(), which extends the pool by one zeroed page.
    MutableByteView get_page(PageId id);

    // Same as get_page followed by mark_dirty.
    MutableByteView get_page_for_write(PageId id);

    void mark_dirty(PageId id);

    // Extends the logical page count; the new pages read as zeros.
    void extend_to(std::uint64_t page_count);

    void flush();

    std::uint64_t page_count() const noexcept { return page_count_; }
    std::size_t page_size() const noexcept { return config_.page_size; }
    std::size_t capacity() const noexcept { return config_.capacity; }
    std::size_t resident_count() const noexcept { return frames_.size(); }
    const PoolStats& stats() const noexcept { return stats_; }
    const std::filesystem::path& path() const noexcept { return config_.file_path; }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    struct Frame {
        PageId id = 0;
        bool dirty = false;
        std::uint8_t* data = nullptr;
        std::size_t prev = kNone; // towards the most recently used end
        std::size_t next = kNone;
    };

    std::size_t acquire_frame();
    void write_back(Frame& frame);
    MutableByteView view(const Frame& f) const noexcept { return {f.data, config_.page_size}; }
    void unlink(std::size_t slot) noexcept;
    void push_front(std::size_t slot) noexcept;
    std::size_t resident_slot(PageId id) const noexcept { return id < slot_of_.size() ? slot_of_[id] : kNone; }

    PoolConfig config_;
    File file_;
    std::uint64_t page_count_ = 0;
    std::vector<Frame> frames_;
    std::vector<std::unique_ptr<std::uint8_t[]>> chunks_; // frame buffers, several pages per allocation
    std::size_t chunk_frames_;
    std::vector<std::size_t> slot_of_; // page id -> frame slot or kNone
    std::size_t lru_head_ = kNone; // most recently used
    std::size_t lru_tail_ = kNone;
    PoolStats stats_;
};

} // namespace statedb
