#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "statedb/page_pool.hpp"
#include "statedb/types.hpp"

namespace statedb {

/// Balanced binary hash tree over the pages of a store.
///
/// Nodes live in their own paged file, heap-indexed: node i has children
/// 2i+1 and 2i+2, the root is node 0, and the leaves of a tree with capacity
/// C (the next power of two >= leaf count) occupy nodes C-1 .. 2C-2. Leaf
/// slots past the leaf count hold the empty digest, and padded inner nodes
/// hold the matching all-empty subtree digest, so the root over n leaves is
/// the root of the power-of-two tree padded with empty leaves on the right.
///
/// Leaf changes are only queued; root() rehashes the queued leaves and then
/// their ancestors level by level, visiting each node at most once.
class HashTree {
public:
    // Supplies the current bytes of a leaf's page.
    using PageReader = std::function<ByteView(std::uint64_t leaf)>;

    HashTree(PoolConfig node_file, std::uint64_t leaf_count);

    void mark_leaf_dirty(std::uint64_t leaf);

    // Adds leaves [leaf_count, new_leaf_count); they are queued dirty.
    void grow(std::uint64_t new_leaf_count);

    Hash32 root(const PageReader& read_page);

    bool dirty() const noexcept { return !dirty_leaves_.empty(); }
    std::uint64_t leaf_count() const noexcept { return leaf_count_; }
    std::uint64_t capacity() const noexcept { return capacity_; }
    std::uint64_t inner_node_count() const noexcept { return capacity_ == 0 ? 0 : capacity_ - 1; }

    // Number of digest computations performed on tree nodes so far.
    std::uint64_t digest_count() const noexcept { return digest_count_; }

    // Root is recomputed first so the node file never holds stale hashes.
    void flush(const PageReader& read_page);

    // Digest of a fully padded subtree of the given height (0 = leaf).
    static const Hash32& padding(unsigned height);

private:
    Hash32 read_node(std::uint64_t index);
    void write_node(std::uint64_t index, const Hash32& h);
    void ensure_node_pages(std::uint64_t node_count);
    void double_capacity();

    PagePool nodes_;
    std::size_t nodes_per_page_;
    std::uint64_t leaf_count_;
    std::uint64_t capacity_;
    std::vector<std::uint64_t> dirty_leaves_;
    std::vector<bool> dirty_mark_;
    std::uint64_t digest_count_ = 0;
};

} // namespace statedb
