#include <chrono>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>

#include "cli.hpp"
#include "statedb/errors.hpp"
#include "statedb/oracle.hpp"

namespace statedb::cli {

std::filesystem::path live_dir(const std::filesystem::path& db_dir)
{
    return db_dir / "live";
}

std::filesystem::path archive_dir(const std::filesystem::path& db_dir)
{
    return db_dir / "archive";
}

std::uint64_t directory_bytes(const std::filesystem::path& dir)
{
    std::uint64_t total = 0;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        return 0;
    }
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir, ec)) {
        if (e.is_regular_file(ec)) {
            const auto n = e.file_size(ec);
            total += ec ? 0 : n;
        }
    }
    return total;
}

DuReport disk_usage(const std::filesystem::path& db_dir)
{
    if (!std::filesystem::is_directory(db_dir)) {
        throw StorageError(db_dir, 0, "not a directory");
    }
    DuReport report;
    for (const auto& e : std::filesystem::recursive_directory_iterator(db_dir)) {
        if (!e.is_regular_file()) {
            continue;
        }
        const auto rel = std::filesystem::relative(e.path(), db_dir);
        const std::uint64_t n = e.file_size();
        report.files.emplace_back(rel.generic_string(), n);
        if (*rel.begin() == "archive") {
            report.archive_bytes += n;
        } else {
            report.live_bytes += n;
        }
    }
    std::sort(report.files.begin(), report.files.end());
    return report;
}

void print_du(const DuReport& report, std::ostream& out)
{
    out << "file,bytes\n";
    for (const auto& [name, n] : report.files) {
        out << name << ',' << n << '\n';
    }
    out << "live_total," << report.live_bytes << '\n';
    out << "archive_total," << report.archive_bytes << '\n';
    out << "total," << report.total() << '\n';
}

namespace {

std::uint64_t spot_check(const ReplayOptions& options, std::uint64_t seed)
{
    ReferenceOracle oracle;
    for (auto& b : read_workload(options.workload)) {
        oracle.apply(b.diff);
    }
    const auto addresses = oracle.addresses();
    if (addresses.empty()) {
        return 0;
    }
    const BlockNumber head = oracle.last_block();

    LiveDbConfig live_config;
    live_config.cache_entries = options.cache;
    LiveDb live{live_dir(options.db_dir), live_config};
    std::optional<ArchiveDb> archive;
    if (options.archive) {
        ArchiveConfig ac;
        ac.read_only = true;
        archive.emplace(archive_dir(options.db_dir), ac);
    }

    std::mt19937_64 rng{seed};
    std::uint64_t mismatches = 0;
    for (std::uint64_t i = 0; i < options.check_reads; ++i) {
        const Address& a = addresses[uniform_below(rng, addresses.size())];
        const auto& snap = oracle.at(head);
        StorageKey k = workload_key(a, uniform_below(rng, 8));
        if (auto it = snap.find(a); it != snap.end() && !it->second->slots.empty()) {
            auto s = it->second->slots.begin();
            std::advance(s, static_cast<std::ptrdiff_t>(uniform_below(rng, it->second->slots.size())));
            k = s->first;
        }
        bool ok = live.get_balance(a) == oracle.balance(a, head) && live.get_nonce(a) == oracle.nonce(a, head)
                  && live.account_exists(a) == oracle.exists(a, head) && live.get_code(a) == oracle.code(a, head)
                  && live.get_storage(a, k) == oracle.storage(a, k, head);
        if (archive) {
            const BlockNumber b = uniform_below(rng, head + 1);
            ok = ok && archive->get_storage_at(a, k, b) == oracle.storage(a, k, b)
                 && archive->get_balance_at(a, b) == oracle.balance(a, b)
                 && archive->get_nonce_at(a, b) == oracle.nonce(a, b)
                 && archive->account_exists_at(a, b) == oracle.exists(a, b)
                 && archive->get_code_at(a, b) == oracle.code(a, b);
        }
        mismatches += ok ? 0 : 1;
    }
    return mismatches;
}

} // namespace

ReplayResult replay(const ReplayOptions& options, std::ostream& csv)
{
    using Clock = std::chrono::steady_clock;
    ReplayResult result;
    WorkloadReader reader{options.workload};

    LiveDbConfig live_config;
    live_config.page_size = options.page_size;
    live_config.cache_entries = options.cache;
    std::filesystem::create_directories(options.db_dir);
    std::optional<LiveDb> live;
    live.emplace(live_dir(options.db_dir), live_config);
    std::optional<ArchiveDb> archive;
    if (options.archive) {
        archive.emplace(archive_dir(options.db_dir));
    }

    if (options.sample_every > 0) {
        csv << kReplayCsvHeader << '\n';
    }
    const auto start = Clock::now();
    auto window_start = start;
    std::uint64_t window_tx = 0;

    while (auto block = reader.next()) {
        const BlockNumber b = block->diff.block;
        const bool live_has = b <= live->current_block();
        const bool archive_has = !archive || b <= archive->enqueued();
        if (live_has && archive_has) {
            continue;
        }
        if (archive && !archive_has) {
            archive->append_block(block->diff);
        }
        if (!live_has) {
            try {
                live->apply_block(std::move(block->diff));
            } catch (const ValidationError& e) {
                throw ValidationError("block " + std::to_string(b) + ": " + e.what());
            }
            const WorldstateRoot root = live->state_root();
            if (root.block != b) {
                throw CorruptionError("state root reports block " + std::to_string(root.block) + " after applying "
                                      + std::to_string(b));
            }
            result.root = root;
        }
        ++result.blocks_applied;
        result.transactions += block->tx_count;
        window_tx += block->tx_count;

        if (options.sample_every > 0 && b % options.sample_every == 0) {
            const auto now = Clock::now();
            const double elapsed = std::chrono::duration<double>(now - start).count();
            const double window = std::chrono::duration<double>(now - window_start).count();
            csv << b << ',' << std::fixed << std::setprecision(6) << elapsed << ',' << result.transactions << ','
                << std::setprecision(1) << (window > 0 ? window_tx / window : 0.0) << ','
                << directory_bytes(live_dir(options.db_dir)) << ',' << directory_bytes(archive_dir(options.db_dir))
                << '\n';
            csv.unsetf(std::ios::floatfield);
            window_start = now;
            window_tx = 0;
        }
    }
    if (archive) {
        archive->close();
    }
    live->flush();
    result.root = live->state_root();
    result.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    live.reset();
    archive.reset();
    result.live_bytes = directory_bytes(live_dir(options.db_dir));
    result.archive_bytes = directory_bytes(archive_dir(options.db_dir));

    if (options.check_reads > 0) {
        result.check_mismatches = spot_check(options, 0x5eedULL);
    }
    return result;
}

} // namespace statedb::cli
