#include "statedb/page_pool.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace statedb {

namespace {

constexpr std::size_t kChunkBytes = std::size_t{1} << 18;

} // namespace

PagePool::PagePool(PoolConfig config)
    : config_{std::move(config)}, chunk_frames_{std::max<std::size_t>(1, kChunkBytes / std::max<std::size_t>(1, config_.page_size))}
{
    if (config_.page_size < 64 || !std::has_single_bit(config_.page_size)) {
        throw FormatError("page size must be a power of two >= 64, got " + std::to_string(config_.page_size));
    }
    if (config_.capacity < 2) {
        throw FormatError("page pool capacity must be >= 2");
    }
    file_ = File(config_.file_path);
    const std::uint64_t size = file_.size();
    page_count_ = (size + config_.page_size - 1) / config_.page_size;
}

PagePool::~PagePool()
{
    try {
        flush();
    } catch (...) {
        // Destructors cannot report; callers wanting errors flush explicitly.
    }
}

MutableByteView PagePool::get_page(PageId id)
{
    if (id > page_count_) {
        throw BoundsError("page " + std::to_string(id) + " beyond page count " + std::to_string(page_count_) + " of "
                          + config_.file_path.string());
    }
    if (lru_head_ != kNone && frames_[lru_head_].id == id) {
        ++stats_.hits;
        return view(frames_[lru_head_]);
    }
    if (const std::size_t hit = resident_slot(id); hit != kNone) {
        unlink(hit);
        push_front(hit);
        ++stats_.hits;
        return view(frames_[hit]);
    }

    const std::size_t slot = acquire_frame();
    Frame& f = frames_[slot];
    f.id = id;
    f.dirty = false;
    if (id == page_count_) {
        ++page_count_;
        std::memset(f.data, 0, config_.page_size);
    } else {
        const std::size_t got = file_.read_at(id * config_.page_size, view(f));
        std::memset(f.data + got, 0, config_.page_size - got);
        ++stats_.loads;
    }
    push_front(slot);
    if (id >= slot_of_.size()) {
        slot_of_.resize(std::max<std::size_t>(id + 1, page_count_), kNone);
    }
    slot_of_[id] = slot;
    return view(f);
}

MutableByteView PagePool::get_page_for_write(PageId id)
{
    auto page = get_page(id);
    frames_[lru_head_].dirty = true;
    return page;
}

void PagePool::mark_dirty(PageId id)
{
    const std::size_t slot = resident_slot(id);
    if (slot == kNone) {
        throw BoundsError("mark_dirty on non-resident page " + std::to_string(id));
    }
    frames_[slot].dirty = true;
}

void PagePool::extend_to(std::uint64_t page_count)
{
    page_count_ = std::max(page_count_, page_count);
}

void PagePool::flush()
{
    std::vector<std::size_t> dirty;
    for (std::size_t slot = 0; slot < frames_.size(); ++slot) {
        if (frames_[slot].dirty) {
            dirty.push_back(slot);
        }
    }
    // Ascending page order keeps the writes sequential.
    std::sort(dirty.begin(), dirty.end(), [this](std::size_t a, std::size_t b) { return frames_[a].id < frames_[b].id; });
    for (const auto slot : dirty) {
        write_back(frames_[slot]);
    }
    const std::uint64_t want = page_count_ * config_.page_size;
    if (file_.size() != want) {
        file_.truncate(want);
    }
}

std::size_t PagePool::acquire_frame()
{
    if (frames_.size() < config_.capacity) {
        const std::size_t slot = frames_.size();
        if (slot % chunk_frames_ == 0) {
            const std::size_t n = std::min(chunk_frames_, config_.capacity - slot);
            chunks_.emplace_back(new std::uint8_t[n * config_.page_size]);
        }
        frames_.emplace_back();
        frames_.back().data = chunks_.back().get() + (slot % chunk_frames_) * config_.page_size;
        return slot;
    }
    const std::size_t victim = lru_tail_;
    unlink(victim);
    Frame& f = frames_[victim];
    if (f.dirty) {
        write_back(f);
    }
    slot_of_[f.id] = kNone;
    ++stats_.evictions;
    return victim;
}

void PagePool::write_back(Frame& frame)
{
    file_.write_at(frame.id * config_.page_size, view(frame));
    frame.dirty = false;
    ++stats_.writes;
}

void PagePool::unlink(std::size_t slot) noexcept
{
    Frame& f = frames_[slot];
    (f.prev == kNone ? lru_head_ : frames_[f.prev].next) = f.next;
    (f.next == kNone ? lru_tail_ : frames_[f.next].prev) = f.prev;
    f.prev = kNone;
    f.next = kNone;
}

void PagePool::push_front(std::size_t slot) noexcept
{
    Frame& f = frames_[slot];
    f.prev = kNone;
    f.next = lru_head_;
    if (lru_head_ != kNone) {
        frames_[lru_head_].prev = slot;
    } else {
        lru_tail_ = slot;
    }
    lru_head_ = slot;
}

} // namespace statedb
