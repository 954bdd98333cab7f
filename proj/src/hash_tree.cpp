#include "statedb/hash_tree.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "statedb/digest.hpp"

namespace statedb {

namespace {

unsigned log2_exact(std::uint64_t v)
{
    return static_cast<unsigned>(std::countr_zero(v));
}

} // namespace

const Hash32& HashTree::padding(unsigned height)
{
    static const std::vector<Hash32> table = [] {
        std::vector<Hash32> t;
        t.push_back(empty_digest());
        for (unsigned i = 1; i < 64; ++i) {
            t.push_back(digest(t.back(), t.back()));
        }
        return t;
    }();
    return table.at(height);
}

HashTree::HashTree(PoolConfig node_file, std::uint64_t leaf_count)
    : nodes_{std::move(node_file)},
      nodes_per_page_{nodes_.page_size() / 32},
      leaf_count_{leaf_count},
      capacity_{leaf_count == 0 ? 0 : std::bit_ceil(leaf_count)}
{
    if (capacity_ > 0 && nodes_.page_count() * nodes_per_page_ < 2 * capacity_ - 1) {
        throw CorruptionError("hash tree node file " + nodes_.path().string() + " too short for "
                              + std::to_string(leaf_count) + " leaves");
    }
    dirty_mark_.resize(leaf_count_, false);
}

Hash32 HashTree::read_node(std::uint64_t index)
{
    const auto page = nodes_.get_page(index / nodes_per_page_);
    return Hash32::from_view(page.subspan((index % nodes_per_page_) * 32, 32));
}

void HashTree::write_node(std::uint64_t index, const Hash32& h)
{
    const auto page = nodes_.get_page_for_write(index / nodes_per_page_);
    std::memcpy(page.data() + (index % nodes_per_page_) * 32, h.data(), 32);
}

void HashTree::ensure_node_pages(std::uint64_t node_count)
{
    nodes_.extend_to((node_count + nodes_per_page_ - 1) / nodes_per_page_);
}

void HashTree::double_capacity()
{
    if (capacity_ == 0) {
        ensure_node_pages(1);
        write_node(0, padding(0));
        capacity_ = 1;
        return;
    }
    const std::uint64_t old_cap = capacity_;
    const unsigned old_depth = log2_exact(old_cap);
    const std::uint64_t new_cap = old_cap * 2;
    ensure_node_pages(2 * new_cap - 1);

    // Old level j becomes the left half of new level j+1. Moving the deepest
    // level first never overwrites a level that has not moved yet.
    for (int j = static_cast<int>(old_depth); j >= 0; --j) {
        const std::uint64_t width = std::uint64_t{1} << j;
        const std::uint64_t old_start = width - 1;
        const std::uint64_t new_start = 2 * width - 1;
        for (std::uint64_t k = width; k-- > 0;) {
            write_node(new_start + k, read_node(old_start + k));
        }
        const Hash32& pad = padding(old_depth - static_cast<unsigned>(j));
        for (std::uint64_t k = width; k < 2 * width; ++k) {
            write_node(new_start + k, pad);
        }
    }
    // Node 0 is stale until root(); grow() queues the new leaves, whose paths reach it.
    capacity_ = new_cap;
}

void HashTree::grow(std::uint64_t new_leaf_count)
{
    if (new_leaf_count <= leaf_count_) {
        return;
    }
    while (capacity_ < new_leaf_count) {
        double_capacity();
    }
    const std::uint64_t old = leaf_count_;
    leaf_count_ = new_leaf_count;
    dirty_mark_.resize(leaf_count_, false);
    for (std::uint64_t leaf = old; leaf < leaf_count_; ++leaf) {
        mark_leaf_dirty(leaf);
    }
}

void HashTree::mark_leaf_dirty(std::uint64_t leaf)
{
    if (leaf >= leaf_count_) {
        grow(leaf + 1);
        return;
    }
    if (!dirty_mark_[leaf]) {
        dirty_mark_[leaf] = true;
        dirty_leaves_.push_back(leaf);
    }
}

Hash32 HashTree::root(const PageReader& read_page)
{
    if (capacity_ == 0) {
        return empty_digest();
    }
    if (dirty_leaves_.empty()) {
        return read_node(0);
    }

    std::sort(dirty_leaves_.begin(), dirty_leaves_.end());
    std::vector<std::uint64_t> level;
    level.reserve(dirty_leaves_.size());
    for (const auto leaf : dirty_leaves_) {
        const std::uint64_t node = capacity_ - 1 + leaf;
        write_node(node, digest(read_page(leaf)));
        ++digest_count_;
        level.push_back(node);
        dirty_mark_[leaf] = false;
    }
    dirty_leaves_.clear();

    // Reverse breadth-first: each pass lifts the sorted frontier one level.
    std::vector<std::uint64_t> parents;
    while (level.front() != 0) {
        parents.clear();
        for (const auto node : level) {
            const std::uint64_t parent = (node - 1) / 2;
            if (parents.empty() || parents.back() != parent) {
                parents.push_back(parent);
            }
        }
        for (const auto parent : parents) {
            const std::uint64_t left = 2 * parent + 1;
            Hash32 h;
            if (left % nodes_per_page_ + 1 < nodes_per_page_) {
                h = digest(nodes_.get_page(left / nodes_per_page_).subspan((left % nodes_per_page_) * 32, 64));
            } else {
                h = digest(read_node(left), read_node(left + 1));
            }
            write_node(parent, h);
            ++digest_count_;
        }
        level.swap(parents);
    }
    return read_node(0);
}

void HashTree::flush(const PageReader& read_page)
{
    root(read_page);
    nodes_.flush();
}

} // namespace statedb
