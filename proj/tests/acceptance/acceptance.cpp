// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "statedb/archive_db.hpp"
#include "statedb/digest.hpp"
#include "statedb/hash_tree.hpp"
#include "statedb/indexer.hpp"
#include "statedb/live_db.hpp"
#include "statedb/oracle.hpp"
#include "statedb/workload.hpp"
#include "support.hpp"

using namespace statedb;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned limits.
constexpr double kOracleRuntimeLimitS = 120.0;
constexpr double kSweepRuntimeLimitS = 300.0;
constexpr double kSweepInversionTolerance = 0.10;
constexpr int kSweepAllowedInversions = 1;
constexpr double kArchiveOverheadLimit = 2.0;
constexpr std::uint64_t kSampledTriples = 10'000;
constexpr std::uint64_t kConcurrentQueries = 10'000;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

LiveDbConfig live_config()
{
    return LiveDbConfig{};
}

WorkloadSpec equivalence_spec()
{
    WorkloadSpec s;
    s.seed = 2024;
    s.blocks = 200;
    s.accounts = 6000;
    s.txs_per_block = 120;
    s.slot_writes_per_tx = 3;
    s.new_key_ratio = 0.35;
    s.delete_ratio = 0.03;
    return s;
}

struct WorkloadStats {
    std::uint64_t accounts = 0;
    std::uint64_t slot_writes = 0;
    std::uint64_t deletions = 0;
    std::uint64_t recreations = 0;
};

WorkloadStats stats_of(const std::vector<WorkloadBlock>& blocks)
{
    WorkloadStats s;
    std::set<Address> touched;
    std::set<Address> deleted;
    for (const auto& b : blocks) {
        for (const auto& u : b.diff.updates) {
            touched.insert(u.address);
            s.slot_writes += u.slots.size();
            if (u.deleted) {
                ++s.deletions;
                deleted.insert(u.address);
            } else if (u.created && deleted.count(u.address)) {
                ++s.recreations;
            }
        }
    }
    s.accounts = touched.size();
    return s;
}

// Slot key for a sample: half the time one the oracle holds at b, else a generator key that may be absent.
StorageKey sample_key(std::mt19937_64& rng, const ReferenceOracle& oracle, const Address& a, BlockNumber b)
{
    const auto& snap = oracle.at(b);
    if (rng() % 2 == 0) {
        if (auto it = snap.find(a); it != snap.end() && !it->second->slots.empty()) {
            auto s = it->second->slots.begin();
            std::advance(s, static_cast<std::ptrdiff_t>(rng() % it->second->slots.size()));
            return s->first;
        }
    }
    return workload_key(a, rng() % 16);
}

Outcome oracle_equivalence()
{
    const auto start = Clock::now();
    const auto blocks = generate_workload(equivalence_spec());
    const auto st = stats_of(blocks);
    support::TempDir dir;
    ReferenceOracle oracle;
    std::uint64_t mismatches = 0;
    std::uint64_t reads = 0;
    {
        LiveDb live{dir / "live", live_config()};
        ArchiveDb archive{dir / "archive"};
        for (const auto& b : blocks) {
            oracle.apply(b.diff);
            archive.append_block(b.diff);
            live.apply_block(b.diff);
            live.state_root();
        }
        archive.wait_idle();
        const BlockNumber head = oracle.last_block();

        for (const auto& [a, acc] : oracle.at(head)) {
            mismatches += live.get_balance(a) != acc->balance;
            mismatches += live.get_nonce(a) != acc->nonce;
            mismatches += live.account_exists(a) != acc->exists;
            mismatches += live.get_code(a) != acc->code;
            for (const auto& [k, v] : acc->slots) {
                mismatches += live.get_storage(a, k) != v;
                ++reads;
            }
            reads += 4;
        }
        std::mt19937_64 rng{99};
        const auto addresses = oracle.addresses();
        for (std::uint64_t i = 0; i < kSampledTriples; ++i) {
            const Address& a = addresses[rng() % addresses.size()];
            const BlockNumber b = rng() % (head + 1);
            const StorageKey k = sample_key(rng, oracle, a, b);
            mismatches += archive.get_storage_at(a, k, b) != oracle.storage(a, k, b);
            mismatches += archive.get_balance_at(a, b) != oracle.balance(a, b);
            mismatches += archive.get_nonce_at(a, b) != oracle.nonce(a, b);
            mismatches += archive.account_exists_at(a, b) != oracle.exists(a, b);
            mismatches += archive.get_code_at(a, b) != oracle.code(a, b);
            mismatches += live.get_storage(a, k) != oracle.storage(a, k, head);
            reads += 6;
        }
    }
    const double elapsed = seconds_since(start);
    const bool shape = blocks.size() >= 200 && st.accounts >= 5000 && st.slot_writes >= 50'000 && st.deletions >= 100
                       && st.recreations >= 100;
    return {shape && mismatches == 0 && elapsed < kOracleRuntimeLimitS,
            fmt("%zu blocks, %llu accounts, %llu slot writes, %llu deletions, %llu recreations; %llu reads, %llu "
                "mismatches; %.1f s",
                blocks.size(), (unsigned long long)st.accounts, (unsigned long long)st.slot_writes,
                (unsigned long long)st.deletions, (unsigned long long)st.recreations, (unsigned long long)reads,
                (unsigned long long)mismatches, elapsed)};
}

Outcome example_table()
{
    support::TempDir dir;
    ArchiveDb archive{dir.path()};
    auto write = [](std::uint64_t account, std::uint64_t key, std::uint64_t value) {
        AccountUpdate u;
        u.address = Address::from_u64(account);
        u.slots = {{StorageKey::from_u64(key), StorageValue::from_u64(value)}};
        return u;
    };
    for (BlockNumber b = 1; b <= 17; ++b) {
        BlockDiff d;
        d.block = b;
        if (b == 8) {
            d.updates.push_back(write(0x140, 1, 100));
        } else if (b == 14) {
            auto u = write(0x123, 1, 100);
            u.slots.emplace_back(StorageKey::from_u64(4), StorageValue::from_u64(80));
            d.updates.push_back(u);
        } else if (b == 16) {
            d.updates.push_back(write(0x123, 1, 110));
        } else if (b == 17) {
            d.updates.push_back(write(0x123, 4, 90));
        }
        archive.append_block(d);
    }
    archive.wait_idle();
    const auto a = Address::from_u64(0x123);
    const auto v15 = archive.get_storage_at(a, StorageKey::from_u64(1), 15);
    const auto v16 = archive.get_storage_at(a, StorageKey::from_u64(1), 16);
    const auto v17 = archive.get_storage_at(a, StorageKey::from_u64(4), 17);
    const bool ok = v15 == StorageValue::from_u64(100) && v16 == StorageValue::from_u64(110)
                    && v17 == StorageValue::from_u64(90);
    return {ok, "(0x123,0x01,15)=" + balance_to_decimal(Balance::from_view(v15.view().last(16)))
                    + " (0x123,0x01,16)=" + balance_to_decimal(Balance::from_view(v16.view().last(16)))
                    + " (0x123,0x04,17)=" + balance_to_decimal(Balance::from_view(v17.view().last(16)))};
}

Outcome lazy_eager()
{
    std::mt19937_64 rng{3};
    std::uint64_t roots = 0;
    std::uint64_t mismatches = 0;
    std::uint64_t idle_digests = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        support::TempDir dir;
        std::vector<Bytes> pages;
        HashTree tree{PoolConfig{256, 4, dir / "tree"}, 0};
        const auto reader = [&](std::uint64_t leaf) { return ByteView{pages[leaf]}; };
        const int ops = 10 + static_cast<int>(rng() % 40);
        for (int op = 0; op < ops; ++op) {
            const auto kind = rng() % 3;
            if (kind == 0 || pages.empty()) {
                pages.push_back(support::random_bytes(rng, 1 + rng() % 48));
                tree.mark_leaf_dirty(pages.size() - 1);
            } else if (kind == 1) {
                const auto leaf = rng() % pages.size();
                pages[leaf] = support::random_bytes(rng, 1 + rng() % 48);
                tree.mark_leaf_dirty(leaf);
            } else {
                ++roots;
                mismatches += tree.root(reader) != support::eager_root(pages);
            }
        }
        ++roots;
        mismatches += tree.root(reader) != support::eager_root(pages);
        const auto before = tree.digest_count();
        tree.root(reader);
        idle_digests += tree.digest_count() - before;
    }
    return {mismatches == 0 && idle_digests == 0,
            fmt("1000 interleavings, %llu roots compared, %llu mismatches, %llu digests on idle roots",
                (unsigned long long)roots, (unsigned long long)mismatches, (unsigned long long)idle_digests)};
}

WorkloadSpec medium_spec(std::uint64_t seed)
{
    WorkloadSpec s;
    s.seed = seed;
    s.blocks = 120;
    s.accounts = 2000;
    s.txs_per_block = 60;
    s.slot_writes_per_tx = 3;
    s.delete_ratio = 0.02;
    return s;
}

Outcome replication()
{
    support::TempDir d1, d2;
    const auto blocks = generate_workload(medium_spec(7));
    std::uint64_t root_mismatches = 0;
    std::uint64_t hash_mismatches = 0;
    {
        LiveDb a{d1 / "live", live_config()};
        LiveDb b{d2 / "live", live_config()};
        ArchiveDb xa{d1 / "archive"};
        ArchiveDb xb{d2 / "archive"};
        for (const auto& blk : blocks) {
            a.apply_block(blk.diff);
            b.apply_block(blk.diff);
            xa.append_block(blk.diff);
            xb.append_block(blk.diff);
            root_mismatches += a.state_root() != b.state_root();
        }
        xa.wait_idle();
        xb.wait_idle();
        for (BlockNumber n = 0; n <= blocks.size(); ++n) {
            hash_mismatches += xa.block_hash(n) != xb.block_hash(n);
        }
        a.flush();
        b.flush();
    }
    const auto c1 = support::directory_contents(d1 / "live");
    const auto c2 = support::directory_contents(d2 / "live");
    const bool identical = c1 == c2;
    return {root_mismatches == 0 && hash_mismatches == 0 && identical,
            fmt("%zu blocks: %llu root mismatches, %llu archive block hash mismatches, %zu live files %s",
                blocks.size(), (unsigned long long)root_mismatches, (unsigned long long)hash_mismatches, c1.size(),
                identical ? "byte-identical" : "DIFFER")};
}

Outcome insertion_order()
{
    const auto blocks = generate_workload(medium_spec(8));
    support::TempDir d1, d2, d3, d4;
    bool equal_ok = true;
    {
        LiveDb a{d1.path(), live_config()};
        LiveDb b{d2.path(), live_config()};
        for (const auto& blk : blocks) {
            a.apply_block(blk.diff);
            b.apply_block(blk.diff);
        }
        equal_ok = a.state_root() == b.state_root();
    }

    // Same final state, new keys introduced in opposite orders.
    LiveDb x{d3.path(), live_config()};
    LiveDb y{d4.path(), live_config()};
    auto update = [](std::uint64_t i) {
        AccountUpdate u;
        u.address = Address::from_u64(i);
        u.created = true;
        u.balance = Balance::from_u64(100);
        u.slots = {{StorageKey::from_u64(1), StorageValue::from_u64(i)}};
        return u;
    };
    for (BlockNumber b = 1; b <= 10; ++b) {
        BlockDiff dx;
        dx.block = b;
        dx.updates = {update(b)};
        BlockDiff dy;
        dy.block = b;
        dy.updates = {update(11 - b)};
        x.apply_block(dx);
        y.apply_block(dy);
    }
    bool same_state = true;
    for (std::uint64_t i = 1; i <= 10; ++i) {
        const auto a = Address::from_u64(i);
        same_state = same_state && x.get_balance(a) == y.get_balance(a)
                     && x.get_storage(a, StorageKey::from_u64(1)) == y.get_storage(a, StorageKey::from_u64(1));
    }
    const bool differ = x.state_root().root != y.state_root().root;
    return {equal_ok && same_state && differ,
            std::string("equal sequences ") + (equal_ok ? "agree" : "DISAGREE") + "; reordered insertions "
                + (same_state ? "same state, " : "DIFFERENT STATE, ") + (differ ? "different roots" : "SAME ROOT")};
}

Outcome pruning()
{
    constexpr std::uint64_t kAccounts = 100;
    constexpr std::uint64_t kSlotsPerAccount = 100;
    constexpr std::uint64_t kWritesPerRound = 500;
    const std::vector<std::uint64_t> rounds{10, 100, 1000};

    std::vector<std::vector<std::pair<std::string, Bytes>>> sizes;
    std::vector<std::uint64_t> entries;
    std::vector<std::uint64_t> changes;
    std::size_t page_size = 0;
    bool all_equal = true;
    for (const auto w : rounds) {
        support::TempDir dir;
        std::mt19937_64 rng{42};
        LiveDb live{dir / "live", live_config()};
        ArchiveDb archive{dir / "archive"};
        page_size = live.page_size();
        std::uint64_t expected = 0;
        BlockDiff genesis;
        genesis.block = 1;
        for (std::uint64_t a = 0; a < kAccounts; ++a) {
            AccountUpdate u;
            u.address = workload_address(1, a);
            u.created = true;
            u.balance = Balance::from_u64(1);
            for (std::uint64_t k = 0; k < kSlotsPerAccount; ++k) {
                u.slots.emplace_back(workload_key(u.address, k), StorageValue::from_u64(rng() | 1));
            }
            genesis.updates.push_back(std::move(u));
        }
        expected += ArchiveDb::change_count(genesis);
        live.apply_block(genesis);
        archive.append_block(genesis);
        for (std::uint64_t r = 0; r < w; ++r) {
            std::set<std::uint64_t> chosen;
            while (chosen.size() < kWritesPerRound) {
                chosen.insert(rng() % (kAccounts * kSlotsPerAccount));
            }
            BlockDiff d;
            d.block = r + 2;
            AccountUpdate* cur = nullptr;
            for (const auto key : chosen) {
                const Address a = workload_address(1, key / kSlotsPerAccount);
                if (cur == nullptr || cur->address != a) {
                    d.updates.emplace_back();
                    cur = &d.updates.back();
                    cur->address = a;
                }
                cur->slots.emplace_back(workload_key(a, key % kSlotsPerAccount), StorageValue::from_u64(rng() | 1));
            }
            expected += ArchiveDb::change_count(d);
            live.apply_block(d);
            archive.append_block(std::move(d));
            live.state_root();
        }
        archive.wait_idle();
        live.flush();
        entries.push_back(archive.entry_count());
        changes.push_back(expected);
        std::vector<std::pair<std::string, Bytes>> files;
        for (const auto& e : std::filesystem::directory_iterator(dir / "live")) {
            files.emplace_back(e.path().filename().string(), Bytes(8, 0));
            put_be64(files.back().second.data(), e.file_size());
        }
        std::sort(files.begin(), files.end());
        sizes.push_back(std::move(files));
    }
    std::uint64_t worst = 0;
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (sizes[i].size() != sizes[0].size()) {
            all_equal = false;
            continue;
        }
        for (std::size_t f = 0; f < sizes[0].size(); ++f) {
            const auto a = get_be64(sizes[0][f].second.data());
            const auto b = get_be64(sizes[i][f].second.data());
            worst = std::max(worst, a > b ? a - b : b - a);
            all_equal = all_equal && sizes[0][f].first == sizes[i][f].first;
        }
    }
    const bool within_page = all_equal && worst <= page_size;
    const bool counts = entries == changes;
    const bool linear = (entries[2] - entries[1]) * (rounds[1] - rounds[0]) == (entries[1] - entries[0]) * (rounds[2] - rounds[1]);
    return {within_page && counts && linear,
            fmt("live files differ by at most %llu bytes (page %zu); archive entries %llu/%llu/%llu vs change counts "
                "%llu/%llu/%llu; %s",
                (unsigned long long)worst, page_size, (unsigned long long)entries[0], (unsigned long long)entries[1],
                (unsigned long long)entries[2], (unsigned long long)changes[0], (unsigned long long)changes[1],
                (unsigned long long)changes[2], linear ? "linear in w" : "NOT linear")};
}

Outcome tree_work_bound()
{
    support::TempDir dir;
    std::vector<Bytes> pages(1024, Bytes{0});
    HashTree tree{PoolConfig{4096, 64, dir / "tree"}, 0};
    const auto reader = [&](std::uint64_t leaf) { return ByteView{pages[leaf]}; };
    tree.grow(1024);
    tree.root(reader);
    pages[512] = Bytes{1};
    pages[513] = Bytes{2};
    tree.mark_leaf_dirty(512);
    tree.mark_leaf_dirty(513);
    const auto before = tree.digest_count();
    const Hash32 root = tree.root(reader);
    const auto used = tree.digest_count() - before;
    const std::uint64_t depth = 10;
    return {used == depth + 2 && root == support::eager_root(pages),
            fmt("%llu digests for two sibling leaves (expected %llu)", (unsigned long long)used,
                (unsigned long long)(depth + 2))};
}

Outcome hash_density()
{
    support::TempDir dir;
    Indexer idx{dir.path(), "keys", 32};
    std::mt19937_64 rng{100};
    std::vector<StorageKey> keys;
    std::set<StorageKey> seen;
    while (keys.size() < 100'000) {
        auto k = support::random_fixed<StorageKey>(rng);
        if (seen.insert(k).second) {
            keys.push_back(k);
        }
    }
    std::vector<bool> ordinal_seen(keys.size(), false);
    std::uint64_t bad = 0;
    for (const auto& k : keys) {
        const auto [ord, added] = idx.get_or_add(k.view());
        if (!added || ord >= keys.size() || ordinal_seen[ord]) {
            ++bad;
        } else {
            ordinal_seen[ord] = true;
        }
    }
    std::uint64_t found = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto ord = idx.get(keys[i].view());
        found += ord && idx.key_at(*ord) == Bytes(keys[i].bytes.begin(), keys[i].bytes.end());
    }
    const bool dense = bad == 0 && std::all_of(ordinal_seen.begin(), ordinal_seen.end(), [](bool b) { return b; });
    const auto splits = idx.table().splits();
    return {dense && found == keys.size() && splits >= 8 && idx.count() == keys.size(),
            fmt("ordinals %s 0..99999, %llu/100000 retrievable, %llu splits", dense ? "exactly" : "NOT",
                (unsigned long long)found, (unsigned long long)splits)};
}

Outcome concurrent_reader()
{
    const auto blocks = generate_workload(equivalence_spec());
    ReferenceOracle oracle;
    for (const auto& b : blocks) {
        oracle.apply(b.diff);
    }
    const auto addresses = oracle.addresses();
    support::TempDir dir;
    ArchiveConfig config;
    config.max_batch = 8;
    ArchiveDb archive{dir / "archive", config};
    LiveDb live{dir / "live", live_config()};
    std::atomic<bool> replaying{true};
    std::atomic<std::uint64_t> during{0};
    std::uint64_t mismatches = 0;
    std::uint64_t torn = 0;
    std::set<BlockNumber> heights;
    std::vector<std::pair<BlockNumber, Hash32>> observed_hashes;
    std::thread reader{[&] {
        std::mt19937_64 rng{5};
        for (std::uint64_t q = 0; q < kConcurrentQueries; ++q) {
            const BlockNumber w = archive.watermark();
            const BlockNumber b = rng() % (w + 1);
            heights.insert(w);
            const Address& a = addresses[rng() % addresses.size()];
            const StorageKey k = sample_key(rng, oracle, a, b);
            mismatches += archive.get_storage_at(a, k, b) != oracle.storage(a, k, b);
            mismatches += archive.get_balance_at(a, b) != oracle.balance(a, b);
            mismatches += archive.account_exists_at(a, b) != oracle.exists(a, b);
            // The published watermark's block hash must already be on disk.
            const Hash32 h = archive.block_hash(w);
            torn += w > 0 && h.is_zero();
            observed_hashes.emplace_back(w, h);
            if (replaying) {
                ++during;
            }
            std::this_thread::yield();
        }
    }};
    for (const auto& b : blocks) {
        archive.append_block(b.diff);
        live.apply_block(b.diff);
        live.state_root();
    }
    archive.wait_idle();
    replaying = false;
    reader.join();
    for (const auto& [w, h] : observed_hashes) {
        torn += archive.block_hash(w) != h;
    }
    return {mismatches == 0 && torn == 0 && during > 0,
            fmt("%llu queries (%llu during replay) over %zu distinct watermarks: %llu mismatches, %llu torn reads",
                (unsigned long long)kConcurrentQueries, (unsigned long long)during.load(), heights.size(),
                (unsigned long long)mismatches, (unsigned long long)torn)};
}

Outcome page_size_sweep()
{
    const auto start = Clock::now();
    support::TempDir dir;
    cli::SweepOptions o;
    for (std::size_t ps = std::size_t{1} << 16; ps >= 256; ps >>= 1) {
        o.page_sizes.push_back(ps);
    }
    o.mode = cli::SweepMode::Memory;
    o.keys = 160'000;
    o.hot = 100;
    o.rounds = 200;
    o.repeats = 9;
    o.dir = dir.path();
    const auto rows = cli::sweep(o);
    int inversions = 0;
    double worst = 0.0;
    std::string series;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        series += fmt("%s%zu:%.0fns", i ? " " : "", rows[i].page_size, rows[i].ns_per_update);
        if (i > 0 && rows[i].ns_per_update > rows[i - 1].ns_per_update) {
            ++inversions;
            worst = std::max(worst, rows[i].ns_per_update / rows[i - 1].ns_per_update - 1.0);
        }
    }
    const double elapsed = seconds_since(start);
    const bool ok = (inversions == 0 || (inversions <= kSweepAllowedInversions && worst <= kSweepInversionTolerance))
                    && elapsed < kSweepRuntimeLimitS;
    return {ok, fmt("%s; %d inversion(s), worst +%.1f%%; %.1f s", series.c_str(), inversions, worst * 100.0, elapsed)};
}

// Default generator workload: the replay a user gets from gen without flags.
Outcome archive_overhead()
{
    support::TempDir dir;
    write_workload(dir / "w.bin", WorkloadSpec{});
    cli::ReplayOptions o;
    o.workload = dir / "w.bin";
    o.sample_every = 0;
    std::ostringstream sink;
    double best_plain = 1e30;
    double best_archive = 1e30;
    WorldstateRoot plain_root;
    WorldstateRoot archive_root;
    for (int rep = 0; rep < 3; ++rep) {
        o.archive = false;
        o.db_dir = dir / ("plain" + std::to_string(rep));
        const auto p = cli::replay(o, sink);
        best_plain = std::min(best_plain, p.elapsed_s);
        plain_root = p.root;
        o.archive = true;
        o.db_dir = dir / ("archive" + std::to_string(rep));
        const auto a = cli::replay(o, sink);
        best_archive = std::min(best_archive, a.elapsed_s);
        archive_root = a.root;
        std::filesystem::remove_all(dir / ("plain" + std::to_string(rep)));
        std::filesystem::remove_all(dir / ("archive" + std::to_string(rep)));
    }
    const double ratio = best_archive / best_plain;
    return {plain_root == archive_root && ratio < kArchiveOverheadLimit,
            fmt("roots %s; %.2f s without archive, %.2f s with (x%.2f)",
                plain_root == archive_root ? "identical" : "DIFFER", best_plain, best_archive, ratio)};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"example table floor queries", example_table},
        {"lazy/eager hash equivalence", lazy_eager},
        {"replication determinism", replication},
        {"insertion-order property", insertion_order},
        {"intrinsic pruning size bound", pruning},
        {"hash-tree work bound", tree_work_bound},
        {"linear-hash density and split safety", hash_density},
        {"concurrent archive consistency", concurrent_reader},
        {"page-size sweep", page_size_sweep},
        {"archive-enabled replay overhead", archive_overhead},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        const auto start = Clock::now();
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += out.pass ? 0 : 1;
        std::cout << (out.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << " ("
                  << fmt("%.1f s", seconds_since(start)) << "): " << out.detail << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
