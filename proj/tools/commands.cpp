#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>

#include <CLI11.hpp>

#include "cli.hpp"
#include "statedb/errors.hpp"

namespace statedb::cli {

namespace {

int cmd_serve(const std::filesystem::path& db_dir, const std::string& listen)
{
    const auto [host, port] = parse_listen(listen);
    ArchiveConfig config;
    config.read_only = true;
    const ArchiveDb archive{archive_dir(db_dir), config};

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    QueryServer server{archive, host, port};
    std::cout << "listening on " << (host.empty() ? "*" : host) << ':' << server.port() << " watermark "
              << archive.watermark() << std::endl;
    std::thread acceptor{[&] { server.run(); }};
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    acceptor.join();
    return 0;
}

std::vector<std::size_t> default_page_sizes()
{
    std::vector<std::size_t> out;
    for (std::size_t ps = std::size_t{1} << 16; ps >= 256; ps >>= 1) {
        out.push_back(ps);
    }
    return out;
}

} // namespace

int run_main(int argc, char** argv)
{
    CLI::App app{"Worldstate database engine: workload generation, replay, footprint and page-size benchmarks"};
    app.require_subcommand(1);

    WorkloadSpec spec;
    std::filesystem::path gen_out;
    auto* gen = app.add_subcommand("gen", "Generate a deterministic synthetic workload file");
    gen->add_option("-o,--out", gen_out, "Output workload file")->required();
    gen->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
    gen->add_option("--blocks", spec.blocks, "Number of blocks")->capture_default_str();
    gen->add_option("--accounts", spec.accounts, "Account population")->capture_default_str();
    gen->add_option("--txs-per-block", spec.txs_per_block, "Transactions per block")->capture_default_str();
    gen->add_option("--slot-writes-per-tx", spec.slot_writes_per_tx, "Storage writes per transaction")
        ->capture_default_str();
    gen->add_option("--new-key-ratio", spec.new_key_ratio, "Share of slot writes that use a fresh key")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    gen->add_option("--delete-ratio", spec.delete_ratio, "Per-transaction account deletion chance")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    ReplayOptions replay_opts;
    std::string archive_mode = "none";
    std::filesystem::path csv_path;
    auto* rep = app.add_subcommand("replay", "Replay a workload file through the live and archive databases");
    rep->add_option("workload", replay_opts.workload, "Workload file")->required()->check(CLI::ExistingFile);
    rep->add_option("--db-dir", replay_opts.db_dir, "Database directory")->required();
    rep->add_option("--archive", archive_mode, "Archive backend")
        ->check(CLI::IsMember({"none", "custom"}))
        ->capture_default_str();
    rep->add_option("--page-size", replay_opts.page_size, "Page size in bytes for a new database")
        ->capture_default_str();
    rep->add_option("--cache", replay_opts.cache, "Index cache entries")->capture_default_str();
    rep->add_option("--sample-every", replay_opts.sample_every, "Emit one CSV sample every N blocks (0 = off)")
        ->capture_default_str();
    rep->add_option("--csv", csv_path, "CSV output file (default stdout)");
    rep->add_option("--check", replay_opts.check_reads, "Random reads compared with an in-memory model afterwards")
        ->capture_default_str();

    std::filesystem::path du_dir;
    auto* du = app.add_subcommand("du", "Report live and archive disk usage");
    du->add_option("--db-dir", du_dir, "Database directory")->required();

    SweepOptions sweep_opts;
    sweep_opts.page_sizes = default_page_sizes();
    std::string sweep_mode = "memory";
    auto* sw = app.add_subcommand("sweep", "Hash cost per update across page sizes");
    sw->add_option("--page-sizes", sweep_opts.page_sizes, "Page sizes in bytes")->delimiter(',');
    sw->add_option("--mode", sweep_mode, "memory or io")
        ->check(CLI::IsMember({"memory", "io"}))
        ->capture_default_str();
    sw->add_option("--keys", sweep_opts.keys, "Records inserted before measuring")->capture_default_str();
    sw->add_option("--hot", sweep_opts.hot, "Records updated each round")->capture_default_str();
    sw->add_option("--rounds", sweep_opts.rounds, "Update rounds per repeat")->capture_default_str();
    sw->add_option("--repeats", sweep_opts.repeats, "Repeats; the fastest is reported")->capture_default_str();
    sw->add_option("--cache-bytes", sweep_opts.cache_bytes, "Page pool budget per file in io mode")
        ->capture_default_str();
    sw->add_option("--seed", sweep_opts.seed, "Seed for values and hot set")->capture_default_str();
    sw->add_option("--dir", sweep_opts.dir, "Scratch directory")->required();

    std::filesystem::path serve_dir;
    std::string listen = "127.0.0.1:7545";
    auto* srv = app.add_subcommand("serve", "Serve historical queries from the archive over TCP");
    srv->add_option("--db-dir", serve_dir, "Database directory")->required();
    srv->add_option("--listen", listen, "host:port")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) {
            write_workload(gen_out, spec);
            return 0;
        }
        if (*rep) {
            replay_opts.archive = archive_mode == "custom";
            std::ofstream file;
            if (!csv_path.empty()) {
                file.open(csv_path);
                if (!file) {
                    throw StorageError(csv_path, 0, "cannot create CSV file");
                }
            }
            std::ostream& csv = csv_path.empty() ? std::cout : file;
            const auto r = replay(replay_opts, csv);
            std::cerr << "replayed " << r.blocks_applied << " blocks, " << r.transactions << " txs in " << r.elapsed_s
                      << " s; root " << r.root.root.hex() << " at block " << r.root.block << "; live "
                      << r.live_bytes << " B, archive " << r.archive_bytes << " B\n";
            if (replay_opts.check_reads > 0) {
                std::cerr << "spot check: " << r.check_mismatches << " mismatches in " << replay_opts.check_reads
                          << " reads\n";
                return r.check_mismatches == 0 ? 0 : 3;
            }
            return 0;
        }
        if (*du) {
            print_du(disk_usage(du_dir), std::cout);
            return 0;
        }
        if (*sw) {
            sweep_opts.mode = sweep_mode == "io" ? SweepMode::Io : SweepMode::Memory;
            print_sweep(sweep(sweep_opts), sweep_opts.mode, std::cout);
            return 0;
        }
        if (*srv) {
            return cmd_serve(serve_dir, listen);
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace statedb::cli
