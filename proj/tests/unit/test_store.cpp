#include <gtest/gtest.h>

#include "statedb/digest.hpp"
#include "statedb/errors.hpp"
#include "statedb/file.hpp"
#include "statedb/store.hpp"
#include "statedb/workload.hpp"
#include "support.hpp"

using namespace statedb;

namespace {

StoreConfig small_config()
{
    StoreConfig c;
    c.page_size = 256;
    c.pool_pages = 4;
    c.tree_pool_pages = 4;
    return c;
}

} // namespace

TEST(Store, LocateRecord)
{
    EXPECT_EQ(locate_record(0, 8), (RecordLocation{0, 0}));
    EXPECT_EQ(locate_record(7, 8), (RecordLocation{0, 7}));
    EXPECT_EQ(locate_record(8, 8), (RecordLocation{1, 0}));
    EXPECT_EQ(locate_record(100, 3), (RecordLocation{33, 1}));
}

TEST(Store, RecordsDoNotStraddlePages)
{
    support::TempDir dir;
    Store store{dir / "s.dat", 24, small_config()};
    EXPECT_EQ(store.slots_per_page(), 10u);
    for (RecordNumber r = 0; r < 25; ++r) {
        store.set(r, Bytes(24, static_cast<std::uint8_t>(r)));
    }
    EXPECT_EQ(store.page_count(), 3u);
    store.flush();
    const auto pages = support::read_pages(dir / "s.dat", 256);
    EXPECT_EQ(pages[1][0], 10);
    EXPECT_EQ(pages[1][239], 19);
    EXPECT_EQ(pages[1][240], 0);
}

TEST(Store, SetGetAndBounds)
{
    support::TempDir dir;
    Store store{dir / "s.dat", 16, small_config()};
    EXPECT_THROW(store.get(0), BoundsError);
    EXPECT_THROW(store.set(1, Bytes(16, 1)), BoundsError);
    EXPECT_THROW(store.set(0, Bytes(15, 1)), FormatError);
    store.set(0, Bytes(16, 1));
    store.set(1, Bytes(16, 2));
    store.set(0, Bytes(16, 3));
    EXPECT_EQ(store.count(), 2u);
    EXPECT_EQ(store.get(0), Bytes(16, 3));
    EXPECT_EQ(store.get(1), Bytes(16, 2));
    EXPECT_THROW(Store(dir / "t.dat", 300, small_config()), FormatError);
}

TEST(Store, RootMatchesEagerRecomputationOverFile)
{
    support::TempDir dir;
    std::mt19937_64 rng{1};
    Store store{dir / "s.dat", 32, small_config()};
    for (int round = 0; round < 20; ++round) {
        for (int i = 0; i < 30; ++i) {
            const RecordNumber r = rng() % (store.count() + 1);
            store.set(r, support::random_bytes(rng, 32));
        }
        store.flush();
        ASSERT_EQ(store.root(), support::eager_root(support::read_pages(dir / "s.dat", 256)));
    }
}

TEST(Store, ReopenKeepsRecordsAndRoot)
{
    support::TempDir dir;
    std::mt19937_64 rng{2};
    Hash32 root;
    std::vector<Bytes> records;
    {
        Store store{dir / "s.dat", 40, small_config()};
        for (int i = 0; i < 100; ++i) {
            records.push_back(support::random_bytes(rng, 40));
            store.set(i, records.back());
        }
        store.flush();
        root = store.root();
    }
    Store store{dir / "s.dat", 40, small_config(), records.size()};
    EXPECT_EQ(store.root(), root);
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(store.get(i), records[i]);
    }
    EXPECT_THROW(Store(dir / "s.dat", 40, small_config(), 1000), CorruptionError);
}

TEST(Store, OnlyTouchedPageChangesItsLeaf)
{
    support::TempDir dir;
    Store store{dir / "s.dat", 32, small_config()};
    for (int i = 0; i < 64; ++i) {
        store.set(i, Bytes(32, 1));
    }
    store.root();
    const auto before = store.tree().digest_count();
    store.set(3, Bytes(32, 2));
    store.root();
    // One leaf plus three ancestors in an 8-leaf tree.
    EXPECT_EQ(store.tree().digest_count() - before, 4u);
}

TEST(Depot, SetGetClear)
{
    support::TempDir dir;
    Depot depot{dir / "c.meta", dir / "c.blob", small_config()};
    const Code a{1, 2, 3};
    const Code b(5000, 7);
    depot.set(0, a);
    depot.set(1, b);
    depot.set(2, Code{});
    EXPECT_EQ(depot.get(0), a);
    EXPECT_EQ(depot.get(1), b);
    EXPECT_EQ(depot.get(2), Code{});
    EXPECT_EQ(depot.code_hash(1), digest(b));
    depot.clear(1);
    EXPECT_EQ(depot.get(1), Code{});
    EXPECT_TRUE(depot.code_hash(1).is_zero());
    EXPECT_EQ(depot.blob_size(), 5003u);
    EXPECT_THROW(depot.set(0, Code(kMaxCodeSize + 1, 0)), FormatError);
}

TEST(Depot, DetectsBlobCorruption)
{
    support::TempDir dir;
    {
        Depot depot{dir / "c.meta", dir / "c.blob", small_config()};
        depot.set(0, Code{1, 2, 3, 4});
        depot.flush();
    }
    {
        File blob{dir / "c.blob"};
        blob.write_at(1, Bytes{0xff});
    }
    Depot depot{dir / "c.meta", dir / "c.blob", small_config(), 1};
    EXPECT_THROW(depot.get(0), CorruptionError);
    Depot lax{dir / "c.meta", dir / "c.blob", small_config(), 1, false};
    EXPECT_EQ(lax.get(0), (Code{1, 0xff, 3, 4}));
}

TEST(Store, RecordArithmeticExhaustive)
{
    for (const std::size_t size : {1, 5, 16, 24, 32, 44}) {
        support::TempDir dir;
        StoreConfig config = small_config();
        config.pool_pages = 8;
        const std::uint64_t n = 10000;
        {
            Store store{dir / "s.dat", size, config};
            const std::size_t spp = store.slots_per_page();
            ASSERT_EQ(spp, config.page_size / size);
            Bytes rec(size);
            for (std::uint64_t r = 0; r < n; ++r) {
                ASSERT_EQ(locate_record(r, spp), (RecordLocation{r / spp, static_cast<std::size_t>(r % spp)}));
                for (std::size_t i = 0; i < size; ++i) {
                    rec[i] = static_cast<std::uint8_t>(r * 31 + i + 1);
                }
                store.set(r, rec);
            }
            store.flush();
        }
        // Each record sits at page r / spp, byte (r % spp) * size, read straight from the file.
        const std::size_t spp = config.page_size / size;
        const auto pages = support::read_pages(dir / "s.dat", config.page_size);
        ASSERT_EQ(pages.size(), (n + spp - 1) / spp) << "record size " << size;
        for (std::uint64_t r = 0; r < n; ++r) {
            const Bytes& page = pages[r / spp];
            for (std::size_t i = 0; i < size; ++i) {
                ASSERT_EQ(page[(r % spp) * size + i], static_cast<std::uint8_t>(r * 31 + i + 1))
                    << "record size " << size << " record " << r;
            }
        }
    }
}

TEST(Store, RandomScheduleMatchesFlatArray)
{
    std::mt19937_64 rng{23};
    support::TempDir dir;
    const std::size_t size = 24;
    std::vector<Bytes> model;
    auto check_all = [&](Store& store) {
        ASSERT_EQ(store.count(), model.size());
        for (std::uint64_t r = 0; r < model.size(); ++r) {
            ASSERT_EQ(store.get(r), model[r]) << "record " << r;
        }
    };
    {
        Store store{dir / "s.dat", size, small_config()};
        for (int step = 0; step < 10000; ++step) {
            const auto op = rng() % 10;
            if (op < 3 || model.empty()) {
                model.push_back(support::random_bytes(rng, size));
                store.set(model.size() - 1, model.back());
            } else if (op < 7) {
                const auto r = uniform_below(rng, model.size());
                model[r] = support::random_bytes(rng, size);
                store.set(r, model[r]);
            } else {
                const auto r = uniform_below(rng, model.size());
                ASSERT_EQ(store.get(r), model[r]) << "step " << step;
            }
            if (step % 1000 == 999) {
                store.flush();
            }
        }
        check_all(store);
        store.flush();
    }
    Store reopened{dir / "s.dat", size, small_config(), model.size()};
    check_all(reopened);
}

TEST(Store, PagingSizeLaw)
{
    // n = 2^k values of 32 bytes, p = 2^l slots per page: inner nodes == n / p - 1.
    for (const unsigned k : {8u, 10u, 12u}) {
        for (const unsigned l : {1u, 3u, 5u, 7u}) {
            support::TempDir dir;
            StoreConfig config;
            config.page_size = std::size_t{32} << l;
            config.pool_pages = 64;
            config.tree_pool_pages = 64;
            Store store{dir / "s.dat", 32, config};
            const Bytes rec(32, 1);
            const std::uint64_t n = std::uint64_t{1} << k;
            for (std::uint64_t r = 0; r < n; ++r) {
                store.set(r, rec);
            }
            store.root();
            EXPECT_EQ(store.tree().inner_node_count(), n / (std::uint64_t{1} << l) - 1) << "k " << k << " l " << l;
        }
    }
}

TEST(Depot, EmptyCodeHashesEmptyString)
{
    support::TempDir dir;
    Depot depot{dir / "c.meta", dir / "c.blob", small_config()};
    depot.set(0, Code{});
    EXPECT_EQ(depot.get(0), Code{});
    EXPECT_EQ(depot.code_hash(0), digest(ByteView{}));
    EXPECT_EQ(depot.blob_size(), 0u);
}

TEST(Depot, RandomScheduleMatchesListOracle)
{
    std::mt19937_64 rng{41};
    support::TempDir dir;
    std::vector<Code> model;
    {
        Depot depot{dir / "c.meta", dir / "c.blob", small_config()};
        for (int step = 0; step < 3000; ++step) {
            const auto op = rng() % 10;
            Code code = support::random_bytes(rng, rng() % 3 == 0 ? 0 : rng() % 700);
            if (op < 3 || model.empty()) {
                model.push_back(code);
                depot.set(model.size() - 1, code);
            } else if (op < 6) {
                const auto r = uniform_below(rng, model.size());
                model[r] = code;
                depot.set(r, code);
            } else if (op < 7) {
                const auto r = uniform_below(rng, model.size());
                model[r].clear();
                depot.clear(r);
            } else {
                const auto r = uniform_below(rng, model.size());
                ASSERT_EQ(depot.get(r), model[r]) << "step " << step;
            }
        }
        depot.flush();
    }
    Depot reopened{dir / "c.meta", dir / "c.blob", small_config(), model.size()};
    for (std::uint64_t r = 0; r < model.size(); ++r) {
        ASSERT_EQ(reopened.get(r), model[r]) << "record " << r;
    }
}
