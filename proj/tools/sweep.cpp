#include <algorithm>
#include <chrono>
#include <iomanip>
#include <memory>
#include <ostream>
#include <random>
#include <set>

#include "cli.hpp"
#include "statedb/errors.hpp"
#include "statedb/store.hpp"

namespace statedb::cli {

namespace {

constexpr std::size_t kRecordSize = 32;

void fill_value(std::mt19937_64& rng, std::uint8_t* out)
{
    for (int i = 0; i < 4; ++i) {
        put_be64(out + 8 * i, rng());
    }
}

// One page size under test: a filled store and its hot set.
class Bench {
public:
    Bench(const SweepOptions& o, std::size_t page_size)
        : o_{o}, dir_{o.dir / ("page-" + std::to_string(page_size))}, rng_{o.seed}
    {
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);

        const std::uint64_t data_pages = (o.keys * kRecordSize + page_size - 1) / page_size;
        // Leaves round up to a power of two; the tree holds twice that many 32-byte nodes.
        std::uint64_t capacity = 1;
        while (capacity < data_pages) {
            capacity <<= 1;
        }
        const std::uint64_t tree_pages = (2 * capacity * 32 + page_size - 1) / page_size;

        StoreConfig config;
        config.page_size = page_size;
        if (o.mode == SweepMode::Memory) {
            config.pool_pages = data_pages + 2;
            config.tree_pool_pages = tree_pages + 2;
        } else {
            config.pool_pages = std::max<std::size_t>(2, o.cache_bytes / page_size);
            config.tree_pool_pages = std::max<std::size_t>(2, o.cache_bytes / page_size);
        }
        store_ = std::make_unique<Store>(dir_ / "values.dat", kRecordSize, config);

        std::uint8_t value[kRecordSize];
        for (std::uint64_t r = 0; r < o.keys; ++r) {
            fill_value(rng_, value);
            store_->set(r, ByteView{value, kRecordSize});
        }
        store_->root();
        if (o.mode == SweepMode::Io) {
            store_->flush();
        }

        std::set<std::uint64_t> hot_set;
        const std::uint64_t hot = std::min<std::uint64_t>(o.hot, o.keys);
        while (hot_set.size() < hot) {
            hot_set.insert(uniform_below(rng_, o.keys));
        }
        hot_.assign(hot_set.begin(), hot_set.end());
        row_.page_size = page_size;
    }

    ~Bench()
    {
        store_.reset();
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }

    Bench(const Bench&) = delete;
    Bench& operator=(const Bench&) = delete;

    void repeat()
    {
        using Clock = std::chrono::steady_clock;
        const double updates = static_cast<double>(o_.rounds) * static_cast<double>(hot_.size());
        const std::uint64_t digests_before = store_->tree().digest_count();
        std::uint8_t value[kRecordSize];
        Clock::duration spent{};
        const auto all_start = Clock::now();
        for (std::uint32_t round = 0; round < o_.rounds; ++round) {
            for (const auto r : hot_) {
                fill_value(rng_, value);
                store_->set(r, ByteView{value, kRecordSize});
            }
            const auto t0 = Clock::now();
            store_->root();
            spent += Clock::now() - t0;
            if (o_.mode == SweepMode::Io) {
                store_->flush();
            }
        }
        if (o_.mode == SweepMode::Io) {
            spent = Clock::now() - all_start;
        }
        const double ns = std::chrono::duration<double, std::nano>(spent).count() / updates;
        if (row_.ns_per_update <= 0 || ns < row_.ns_per_update) {
            row_.ns_per_update = ns;
            row_.updates_per_s = ns > 0 ? 1e9 / ns : 0.0;
        }
        row_.digests_per_update = static_cast<double>(store_->tree().digest_count() - digests_before) / updates;
    }

    const SweepRow& row() const noexcept { return row_; }

private:
    const SweepOptions& o_;
    std::filesystem::path dir_;
    std::mt19937_64 rng_;
    std::unique_ptr<Store> store_;
    std::vector<std::uint64_t> hot_;
    SweepRow row_;
};

} // namespace

std::vector<SweepRow> sweep(const SweepOptions& options)
{
    if (options.page_sizes.empty()) {
        throw ValidationError("sweep needs at least one page size");
    }
    for (const auto ps : options.page_sizes) {
        if (ps < 64 || (ps & (ps - 1)) != 0) {
            throw ValidationError("page size " + std::to_string(ps) + " is not a power of two >= 64");
        }
    }
    if (options.keys == 0 || options.hot == 0 || options.rounds == 0) {
        throw ValidationError("sweep needs keys, hot items and rounds");
    }
    // Repeats rotate across page sizes so a slow stretch of the machine is not charged to one size.
    std::vector<std::unique_ptr<Bench>> benches;
    for (const auto ps : options.page_sizes) {
        benches.push_back(std::make_unique<Bench>(options, ps));
    }
    for (std::uint32_t rep = 0; rep < std::max<std::uint32_t>(1, options.repeats); ++rep) {
        for (auto& b : benches) {
            b->repeat();
        }
    }
    std::vector<SweepRow> rows;
    for (const auto& b : benches) {
        rows.push_back(b->row());
    }
    return rows;
}

void print_sweep(const std::vector<SweepRow>& rows, SweepMode mode, std::ostream& out)
{
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.page_size << ',' << (mode == SweepMode::Memory ? "memory" : "io") << ',' << std::fixed
            << std::setprecision(1) << r.ns_per_update << ',' << std::setprecision(3) << r.digests_per_update << ','
            << std::setprecision(1) << r.updates_per_s << '\n';
        out.unsetf(std::ios::floatfield);
    }
}

} // namespace statedb::cli
