#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "statedb/archive_db.hpp"
#include "statedb/live_db.hpp"
#include "statedb/workload.hpp"

namespace statedb::cli {

struct ReplayOptions {
    std::filesystem::path workload;
    std::filesystem::path db_dir;
    bool archive = false;
    std::size_t page_size = 4096;
    std::size_t cache = std::size_t{1} << 16;
    std::uint64_t sample_every = 100; // 0 disables sampling
    std::uint64_t check_reads = 0;    // random reads compared with an oracle after reopening
};

struct ReplayResult {
    WorldstateRoot root;
    std::uint64_t blocks_applied = 0;
    std::uint64_t transactions = 0;
    double elapsed_s = 0.0;
    std::uint64_t live_bytes = 0;
    std::uint64_t archive_bytes = 0;
    std::uint64_t check_mismatches = 0;
};

inline constexpr const char* kReplayCsvHeader = "block_height,elapsed_s,tx_count,tx_per_second,live_bytes,archive_bytes";

// Writes CSV samples to csv; blocks already present in the database are skipped.
ReplayResult replay(const ReplayOptions& options, std::ostream& csv);

std::filesystem::path live_dir(const std::filesystem::path& db_dir);
std::filesystem::path archive_dir(const std::filesystem::path& db_dir);

struct DuReport {
    std::vector<std::pair<std::string, std::uint64_t>> files; // path relative to the db dir
    std::uint64_t live_bytes = 0;
    std::uint64_t archive_bytes = 0;
    std::uint64_t total() const noexcept { return live_bytes + archive_bytes; }
};

std::uint64_t directory_bytes(const std::filesystem::path& dir);
DuReport disk_usage(const std::filesystem::path& db_dir);
void print_du(const DuReport& report, std::ostream& out);

enum class SweepMode { Memory, Io };

struct SweepOptions {
    std::vector<std::size_t> page_sizes;
    SweepMode mode = SweepMode::Memory;
    std::uint64_t keys = 160'000;
    std::uint32_t hot = 100;
    std::uint32_t rounds = 200;
    std::uint32_t repeats = 3;
    std::size_t cache_bytes = std::size_t{1} << 20; // io mode pool budget per file
    std::uint64_t seed = 1;
    std::filesystem::path dir;                      // scratch space
};

struct SweepRow {
    std::size_t page_size = 0;
    double ns_per_update = 0.0;
    double digests_per_update = 0.0;
    double updates_per_s = 0.0;
};

inline constexpr const char* kSweepCsvHeader = "page_size,mode,ns_per_update,digests_per_update,updates_per_s";

std::vector<SweepRow> sweep(const SweepOptions& options);
void print_sweep(const std::vector<SweepRow>& rows, SweepMode mode, std::ostream& out);

// One request line (without the newline) to one response line.
std::string handle_request(const ArchiveDb& archive, const std::string& line);

/// Line-oriented TCP front end over a read-only archive; one thread per connection.
class QueryServer {
public:
    QueryServer(const ArchiveDb& archive, const std::string& host, std::uint16_t port);
    ~QueryServer();

    QueryServer(const QueryServer&) = delete;
    QueryServer& operator=(const QueryServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    void run();  // accepts until stop()
    void stop();

private:
    void serve_connection(int fd);

    const ArchiveDb& archive_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::mutex conn_mu_;
    std::vector<int> conn_fds_;
    std::vector<std::thread> workers_;
};

// "host:port"; the host may be empty for all interfaces.
std::pair<std::string, std::uint16_t> parse_listen(const std::string& addr);

int run_main(int argc, char** argv);

} // namespace statedb::cli
