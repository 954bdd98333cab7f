#include "statedb/archive_db.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <set>

#include <json.hpp>

#include "statedb/digest.hpp"

namespace statedb {

namespace {

const std::array<TableSchema, ArchiveDb::kTableCount> kSchemas = {{
    {"storage", 20 + 4 + 32, 32},
    {"balance", 20, 16},
    {"nonce", 20, 8},
    {"code", 20, 32},
    {"state", 20, 5},
    {"accounthash", 20, 32},
    {"codeindex", 32, 12},
}};

constexpr int kManifestVersion = 1;
constexpr BlockNumber kMaxBlock = ~BlockNumber{0};

class RowWriter {
public:
    RowWriter(Bytes& rows, const TableSchema& schema) : rows_{rows}, start_{rows.size()}, schema_{schema}
    {
        rows_.resize(start_ + schema.row_width());
    }

    RowWriter& key(ByteView k)
    {
        std::memcpy(rows_.data() + start_ + pos_, k.data(), k.size());
        pos_ += k.size();
        return *this;
    }

    RowWriter& key_u32(std::uint32_t v)
    {
        put_be32(rows_.data() + start_ + pos_, v);
        pos_ += 4;
        return *this;
    }

    RowWriter& block(BlockNumber b)
    {
        put_be64(rows_.data() + start_ + schema_.key_width, b);
        pos_ = schema_.prefix_width();
        return *this;
    }

    RowWriter& payload(ByteView p)
    {
        std::memcpy(rows_.data() + start_ + pos_, p.data(), p.size());
        pos_ += p.size();
        return *this;
    }

    RowWriter& payload_u8(std::uint8_t v)
    {
        rows_[start_ + pos_++] = v;
        return *this;
    }

    RowWriter& payload_u32(std::uint32_t v)
    {
        put_be32(rows_.data() + start_ + pos_, v);
        pos_ += 4;
        return *this;
    }

    RowWriter& payload_u64(std::uint64_t v)
    {
        put_be64(rows_.data() + start_ + pos_, v);
        pos_ += 8;
        return *this;
    }

private:
    Bytes& rows_;
    std::size_t start_;
    std::size_t pos_ = 0;
    const TableSchema& schema_;
};

std::array<std::uint8_t, 56> storage_key(const Address& a, Reincarnation r, const StorageKey& k)
{
    std::array<std::uint8_t, 56> key{};
    std::memcpy(key.data(), a.data(), 20);
    put_be32(key.data() + 20, r);
    std::memcpy(key.data() + 24, k.data(), 32);
    return key;
}

} // namespace

const TableSchema& ArchiveDb::schema(Table t)
{
    return kSchemas[t];
}

std::uint64_t ArchiveDb::change_count(const BlockDiff& diff)
{
    std::uint64_t n = 0;
    for (const auto& u : diff.updates) {
        if (u.deleted) {
            n += 4; // state, balance, nonce, code
            continue;
        }
        n += (u.created ? 1 : 0) + (u.balance ? 1 : 0) + (u.nonce ? 1 : 0) + (u.code ? 1 : 0) + u.slots.size();
    }
    return n;
}

ArchiveDb::ArchiveDb(std::filesystem::path dir, ArchiveConfig config) : dir_{std::move(dir)}, config_{config}
{
    if (config_.queue_depth == 0 || config_.max_batch == 0 || config_.merge_fanin < 2) {
        throw FormatError("archive config: queue depth and batch must be positive, merge fan-in >= 2");
    }
    load();
    if (!config_.read_only) {
        appender_ = std::thread([this] { appender_loop(); });
    }
}

ArchiveDb::~ArchiveDb()
{
    try {
        close();
    } catch (...) {
    }
}

std::filesystem::path ArchiveDb::run_path(Table t, std::uint64_t seq) const
{
    char name[64];
    std::snprintf(name, sizeof(name), "%s-%010llu.run", kSchemas[t].name.c_str(), static_cast<unsigned long long>(seq));
    return dir_ / name;
}

void ArchiveDb::load()
{
    const auto manifest_path = dir_ / "MANIFEST";
    const File::Mode mode = config_.read_only ? File::Mode::ReadOnly : File::Mode::ReadWrite;
    if (!config_.read_only) {
        std::filesystem::create_directories(dir_);
    } else if (!std::filesystem::exists(manifest_path)) {
        throw StorageError(manifest_path, 0, "archive manifest missing");
    }
    block_hashes_ = File(dir_ / "blocks.hash", mode);
    code_blob_ = File(dir_ / "code.blob", mode);

    auto pub = std::make_shared<Published>();
    std::set<std::filesystem::path> referenced;
    if (std::filesystem::exists(manifest_path)) {
        File mf{manifest_path, File::Mode::ReadOnly};
        std::string text(mf.size(), '\0');
        mf.read_exact(0, MutableByteView{reinterpret_cast<std::uint8_t*>(text.data()), text.size()});
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw CorruptionError("archive manifest unreadable: " + std::string(e.what()));
        }
        if (j.at("version").get<int>() != kManifestVersion) {
            throw CorruptionError("unsupported archive manifest version");
        }
        pub->watermark = j.at("watermark").get<BlockNumber>();
        pub->next_seq = j.at("next_seq").get<std::uint64_t>();
        for (std::size_t t = 0; t < kTableCount; ++t) {
            for (const auto& r : j.at("tables").at(kSchemas[t].name)) {
                const auto path = dir_ / r.at("file").get<std::string>();
                referenced.insert(path);
                auto run = std::make_shared<const Run>(path, kSchemas[t], r.at("level").get<unsigned>(),
                                                       r.at("min_block").get<BlockNumber>(),
                                                       r.at("max_block").get<BlockNumber>());
                if (run->rows() != r.at("rows").get<std::size_t>()) {
                    throw CorruptionError("run " + path.string() + " row count disagrees with manifest");
                }
                pub->tables[t].push_back(std::move(run));
            }
        }
    }

    const std::uint64_t hash_bytes = (pub->watermark + 1) * 32;
    if (block_hashes_.size() < hash_bytes) {
        if (config_.read_only || pub->watermark > 0) {
            throw CorruptionError("block hash file shorter than watermark");
        }
        const Hash32 genesis{};
        block_hashes_.write_at(0, genesis.view());
    }
    if (!config_.read_only) {
        block_hashes_.truncate(hash_bytes);
    }
    std::uint8_t h[32];
    block_hashes_.read_exact(pub->watermark * 32, MutableByteView{h, 32});
    last_block_hash_ = Hash32::from_view(ByteView{h, 32});

    // Rebuild appender state; runs are oldest first, rows key-then-block
    // ordered, so the last row seen per account is its latest.
    for (const auto& run : pub->tables[StateLog]) {
        for (std::size_t i = 0; i < run->rows(); ++i) {
            const std::uint8_t* row = run->row(i);
            accounts_[Address::from_view(ByteView{row, 20})].reincarnation = get_be32(row + 28 + 1);
        }
    }
    for (const auto& run : pub->tables[AccountHash]) {
        for (std::size_t i = 0; i < run->rows(); ++i) {
            const std::uint8_t* row = run->row(i);
            accounts_[Address::from_view(ByteView{row, 20})].hash = Hash32::from_view(ByteView{row + 28, 32});
        }
    }
    for (const auto& run : pub->tables[CodeIndex]) {
        for (std::size_t i = 0; i < run->rows(); ++i) {
            const std::uint8_t* row = run->row(i);
            const std::uint64_t off = get_be64(row + 40);
            const std::uint32_t len = get_be32(row + 48);
            codes_[Hash32::from_view(ByteView{row, 32})] = {off, len};
            blob_size_ = std::max(blob_size_, off + len);
        }
    }
    if (!config_.read_only) {
        code_blob_.truncate(blob_size_);
        for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
            if (entry.path().extension() == ".run" && !referenced.contains(entry.path())) {
                std::filesystem::remove(entry.path());
            }
        }
    }

    enqueued_ = pub->watermark;
    published_ = std::move(pub);
}

std::shared_ptr<const ArchiveDb::Published> ArchiveDb::snapshot() const
{
    std::lock_guard lock{publish_mu_};
    return published_;
}

BlockNumber ArchiveDb::watermark() const
{
    return snapshot()->watermark;
}

BlockNumber ArchiveDb::enqueued() const
{
    std::lock_guard lock{queue_mu_};
    return enqueued_;
}

void ArchiveDb::rethrow_failure() const
{
    if (failure_) {
        std::rethrow_exception(failure_);
    }
}

void ArchiveDb::append_block(BlockDiff diff)
{
    if (config_.read_only) {
        throw Error("archive opened read-only");
    }
    BlockDiff canonical = canonicalize(std::move(diff));
    std::unique_lock lock{queue_mu_};
    rethrow_failure();
    if (stopping_) {
        throw Error("archive is closed");
    }
    if (canonical.block != enqueued_ + 1) {
        throw SequencingError("archive expects block " + std::to_string(enqueued_ + 1) + ", got "
                              + std::to_string(canonical.block));
    }
    queue_cv_.wait(lock, [this] { return queue_.size() < config_.queue_depth || failure_; });
    rethrow_failure();
    enqueued_ = canonical.block;
    queue_.push_back(std::move(canonical));
    queue_cv_.notify_all();
}

void ArchiveDb::wait_idle()
{
    std::unique_lock lock{queue_mu_};
    ++flush_waiters_;
    queue_cv_.notify_all();
    queue_cv_.wait(lock, [this] { return (queue_.empty() && !in_flight_) || failure_; });
    --flush_waiters_;
    rethrow_failure();
}

void ArchiveDb::close()
{
    {
        std::lock_guard lock{queue_mu_};
        stopping_ = true;
    }
    queue_cv_.notify_all();
    if (appender_.joinable()) {
        appender_.join();
    }
    std::lock_guard lock{queue_mu_};
    rethrow_failure();
}

void ArchiveDb::appender_loop()
{
    for (;;) {
        std::vector<BlockDiff> work;
        {
            std::unique_lock lock{queue_mu_};
            queue_cv_.wait(lock, [this] { return !queue_.empty() || stopping_; });
            if (queue_.empty()) {
                return;
            }
            const std::size_t want = std::min({config_.min_batch, config_.max_batch, config_.queue_depth});
            queue_cv_.wait_for(lock, config_.linger, [this, want] {
                return queue_.size() >= want || stopping_ || flush_waiters_ > 0;
            });
            while (!queue_.empty() && work.size() < config_.max_batch) {
                work.push_back(std::move(queue_.front()));
                queue_.pop_front();
            }
            in_flight_ = true;
        }
        queue_cv_.notify_all();
        try {
            Batch batch;
            batch.first = work.front().block;
            batch.last = work.back().block;
            for (const auto& diff : work) {
                ingest(diff, batch);
            }
            commit(batch);
        } catch (...) {
            std::lock_guard lock{queue_mu_};
            failure_ = std::current_exception();
            in_flight_ = false;
            queue_.clear();
            queue_cv_.notify_all();
            return;
        }
        {
            std::lock_guard lock{queue_mu_};
            in_flight_ = false;
        }
        queue_cv_.notify_all();
    }
}

void ArchiveDb::ingest(const BlockDiff& diff, Batch& batch)
{
    const BlockNumber block = diff.block;
    Hasher block_hasher;
    block_hasher.update(last_block_hash_);

    auto row = [&](Table t) { return RowWriter{batch.rows[t], kSchemas[t]}; };
    const Balance zero_balance{};
    const Hash32 zero_hash{};

    for (const auto& u : diff.updates) {
        AccountTrack& track = accounts_[u.address];
        const Hash32 change = digest(serialize_update(u));
        track.hash = digest(track.hash, change);
        block_hasher.update(track.hash);
        row(AccountHash).key(u.address.view()).block(block).payload(track.hash.view());

        if (u.deleted) {
            ++track.reincarnation;
            row(StateLog).key(u.address.view()).block(block).payload_u8(0).payload_u32(track.reincarnation);
            row(BalanceLog).key(u.address.view()).block(block).payload(zero_balance.view());
            row(NonceLog).key(u.address.view()).block(block).payload_u64(0);
            row(CodeLog).key(u.address.view()).block(block).payload(zero_hash.view());
            continue;
        }
        if (u.created) {
            row(StateLog).key(u.address.view()).block(block).payload_u8(1).payload_u32(track.reincarnation);
        }
        if (u.balance) {
            row(BalanceLog).key(u.address.view()).block(block).payload(u.balance->view());
        }
        if (u.nonce) {
            row(NonceLog).key(u.address.view()).block(block).payload_u64(u.nonce->value);
        }
        if (u.code) {
            const Hash32 h = digest(*u.code);
            if (!codes_.contains(h)) {
                const std::uint64_t off = blob_size_;
                if (!u.code->empty()) {
                    code_blob_.write_at(off, *u.code);
                    blob_size_ += u.code->size();
                }
                const auto len = static_cast<std::uint32_t>(u.code->size());
                codes_.emplace(h, std::make_pair(off, len));
                row(CodeIndex).key(h.view()).block(block).payload_u64(off).payload_u32(len);
            }
            row(CodeLog).key(u.address.view()).block(block).payload(h.view());
        }
        for (const auto& [k, v] : u.slots) {
            const auto key = storage_key(u.address, track.reincarnation, k);
            row(Storage).key(ByteView{key.data(), key.size()}).block(block).payload(v.view());
        }
    }
    last_block_hash_ = block_hasher.finish();
    batch.block_hashes.push_back(last_block_hash_);
}

void ArchiveDb::commit(Batch& batch)
{
    auto next = std::make_shared<Published>(*snapshot());
    for (std::size_t t = 0; t < kTableCount; ++t) {
        if (batch.rows[t].empty()) {
            continue;
        }
        sort_rows(batch.rows[t], kSchemas[t]);
        next->tables[t].push_back(write_run(run_path(static_cast<Table>(t), next->next_seq++), kSchemas[t],
                                            batch.rows[t], 0, batch.first, batch.last, config_.sync));
    }
    Bytes hashes;
    hashes.reserve(batch.block_hashes.size() * 32);
    for (const auto& h : batch.block_hashes) {
        hashes.insert(hashes.end(), h.bytes.begin(), h.bytes.end());
    }
    block_hashes_.write_at(batch.first * 32, hashes);
    if (config_.sync) {
        block_hashes_.sync();
        code_blob_.sync();
    }
    next->watermark = batch.last;
    std::vector<std::filesystem::path> obsolete;
    maybe_merge(*next, obsolete);
    write_manifest(*next);
    {
        std::lock_guard lock{publish_mu_};
        published_ = next;
    }
    // Readers on older snapshots keep their runs mapped after the unlink.
    for (const auto& p : obsolete) {
        std::filesystem::remove(p);
    }
}

void ArchiveDb::maybe_merge(Published& next, std::vector<std::filesystem::path>& obsolete)
{
    for (std::size_t t = 0; t < kTableCount; ++t) {
        RunList& runs = next.tables[t];
        for (;;) {
            if (runs.empty()) {
                break;
            }
            const unsigned level = runs.back()->level();
            std::size_t group = 0;
            while (group < runs.size() && runs[runs.size() - 1 - group]->level() == level) {
                ++group;
            }
            if (group < config_.merge_fanin) {
                break;
            }
            const RunList inputs(runs.end() - static_cast<std::ptrdiff_t>(group), runs.end());
            auto merged = merge_runs(run_path(static_cast<Table>(t), next.next_seq++), kSchemas[t], inputs, level + 1,
                                     config_.sync);
            for (const auto& r : inputs) {
                obsolete.push_back(r->path());
            }
            runs.resize(runs.size() - group);
            runs.push_back(std::move(merged));
        }
    }
}

void ArchiveDb::write_manifest(const Published& p)
{
    nlohmann::json j;
    j["version"] = kManifestVersion;
    j["watermark"] = p.watermark;
    j["next_seq"] = p.next_seq;
    nlohmann::json tables = nlohmann::json::object();
    for (std::size_t t = 0; t < kTableCount; ++t) {
        nlohmann::json runs = nlohmann::json::array();
        for (const auto& r : p.tables[t]) {
            runs.push_back({{"file", r->path().filename().string()},
                            {"level", r->level()},
                            {"rows", r->rows()},
                            {"min_block", r->min_block()},
                            {"max_block", r->max_block()}});
        }
        tables[kSchemas[t].name] = std::move(runs);
    }
    j["tables"] = std::move(tables);
    const std::string text = j.dump(1);
    const auto tmp = dir_ / "MANIFEST.tmp";
    {
        File f{tmp};
        f.truncate(0);
        f.write_at(0, ByteView{reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
        if (config_.sync) {
            f.sync();
        }
    }
    std::filesystem::rename(tmp, dir_ / "MANIFEST");
}

std::shared_ptr<const ArchiveDb::Published> ArchiveDb::checked(BlockNumber b) const
{
    auto snap = snapshot();
    if (b > snap->watermark) {
        throw NotAvailableError("block " + std::to_string(b) + " not yet available (watermark "
                                + std::to_string(snap->watermark) + ")");
    }
    return snap;
}

namespace {

std::optional<ByteView> lookup(const std::array<RunList, ArchiveDb::kTableCount>& tables, ArchiveDb::Table t,
                               ByteView key, BlockNumber b)
{
    return floor_lookup(tables[t], kSchemas[t], key, b);
}

} // namespace

Reincarnation ArchiveDb::reincarnation_at(const Address& a, BlockNumber b) const
{
    const auto snap = checked(b);
    const auto state = lookup(snap->tables, StateLog, a.view(), b);
    return state ? get_be32(state->data() + 1) : 0;
}

StorageValue ArchiveDb::get_storage_at(const Address& a, const StorageKey& k, BlockNumber b) const
{
    const auto snap = checked(b);
    const auto state = lookup(snap->tables, StateLog, a.view(), b);
    const Reincarnation reinc = state ? get_be32(state->data() + 1) : 0;
    const auto key = storage_key(a, reinc, k);
    const auto value = lookup(snap->tables, Storage, ByteView{key.data(), key.size()}, b);
    return value ? StorageValue::from_view(*value) : StorageValue{};
}

Balance ArchiveDb::get_balance_at(const Address& a, BlockNumber b) const
{
    const auto snap = checked(b);
    const auto v = lookup(snap->tables, BalanceLog, a.view(), b);
    return v ? Balance::from_view(*v) : Balance{};
}

Nonce ArchiveDb::get_nonce_at(const Address& a, BlockNumber b) const
{
    const auto snap = checked(b);
    const auto v = lookup(snap->tables, NonceLog, a.view(), b);
    return v ? Nonce{get_be64(v->data())} : Nonce{};
}

Code ArchiveDb::get_code_at(const Address& a, BlockNumber b) const
{
    const auto snap = checked(b);
    const auto h = lookup(snap->tables, CodeLog, a.view(), b);
    if (!h || Hash32::from_view(*h).is_zero()) {
        return {};
    }
    const auto loc = lookup(snap->tables, CodeIndex, *h, kMaxBlock);
    if (!loc) {
        throw CorruptionError("code hash " + to_hex(*h) + " missing from code index");
    }
    Code code(get_be32(loc->data() + 8));
    code_blob_.read_exact(get_be64(loc->data()), code);
    return code;
}

bool ArchiveDb::account_exists_at(const Address& a, BlockNumber b) const
{
    const auto snap = checked(b);
    const auto state = lookup(snap->tables, StateLog, a.view(), b);
    return state && (*state)[0] != 0;
}

Hash32 ArchiveDb::block_hash(BlockNumber b) const
{
    checked(b);
    Hash32 h;
    block_hashes_.read_exact(b * 32, h.bytes);
    return h;
}

Hash32 ArchiveDb::account_hash_at(const Address& a, BlockNumber b) const
{
    const auto snap = checked(b);
    const auto v = lookup(snap->tables, AccountHash, a.view(), b);
    return v ? Hash32::from_view(*v) : Hash32{};
}

std::uint64_t ArchiveDb::entry_count() const
{
    const auto snap = snapshot();
    std::uint64_t n = 0;
    for (const Table t : {Storage, BalanceLog, NonceLog, CodeLog, StateLog}) {
        for (const auto& r : snap->tables[t]) {
            n += r->rows();
        }
    }
    return n;
}

std::uint64_t ArchiveDb::run_count() const
{
    const auto snap = snapshot();
    std::uint64_t n = 0;
    for (const auto& runs : snap->tables) {
        n += runs.size();
    }
    return n;
}

std::vector<std::filesystem::path> ArchiveDb::run_files() const
{
    const auto snap = snapshot();
    std::vector<std::filesystem::path> out;
    for (const auto& runs : snap->tables) {
        for (const auto& r : runs) {
            out.push_back(r->path());
        }
    }
    return out;
}

} // namespace statedb
