#include "statedb/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "statedb/digest.hpp"
#include "statedb/errors.hpp"

namespace statedb {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'B', 'W', 'O', 'R', 'K', '1'};
constexpr double kZipfExponent = 0.9;
constexpr std::size_t kCodePoolSize = 16;
constexpr std::size_t kMaxGeneratedCode = 4096;
constexpr double kCodeRatio = 0.2;
constexpr double kClearRatio = 0.05;
constexpr std::uint64_t kUnitBalance = 1'000'000'000'000'000'000ULL;

void dedupe_slots(AccountUpdate& u)
{
    // Later writes win.
    std::stable_sort(u.slots.begin(), u.slots.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<StorageKey, StorageValue>> out;
    out.reserve(u.slots.size());
    for (auto& s : u.slots) {
        if (!out.empty() && out.back().first == s.first) {
            out.back().second = s.second;
        } else {
            out.push_back(s);
        }
    }
    u.slots = std::move(out);
}

} // namespace

void WorkloadSpec::validate() const
{
    if (accounts == 0) {
        throw ValidationError("workload needs at least one account");
    }
    if (!(new_key_ratio >= 0.0 && new_key_ratio <= 1.0) || !(delete_ratio >= 0.0 && delete_ratio <= 1.0)) {
        throw ValidationError("workload ratios must lie in [0, 1]");
    }
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n)
{
    if (n == 0) {
        return 0;
    }
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

double uniform_unit(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ZipfSampler::ZipfSampler(std::uint64_t n, double s) : cdf_(n)
{
    double total = 0.0;
    for (std::uint64_t r = 0; r < n; ++r) {
        total += 1.0 / std::pow(static_cast<double>(r + 1), s);
        cdf_[r] = total;
    }
    for (auto& c : cdf_) {
        c /= total;
    }
}

std::uint64_t ZipfSampler::operator()(std::mt19937_64& rng) const
{
    const double u = uniform_unit(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::uint64_t>(static_cast<std::uint64_t>(it - cdf_.begin()), cdf_.size() - 1);
}

Address workload_address(std::uint64_t seed, std::uint64_t index)
{
    std::uint8_t buf[16];
    put_be64(buf, seed);
    put_be64(buf + 8, index);
    return Address::from_view(digest(ByteView{buf, 16}).view().first(20));
}

StorageKey workload_key(const Address& a, std::uint64_t index)
{
    std::uint8_t buf[28];
    std::memcpy(buf, a.data(), 20);
    put_be64(buf + 20, index);
    return StorageKey::from_view(digest(ByteView{buf, 28}).view());
}

WorkloadGenerator::WorkloadGenerator(WorkloadSpec spec)
    : spec_{(spec.validate(), spec)},
      rng_{spec.seed},
      popularity_{spec.accounts, kZipfExponent},
      state_(spec.accounts),
      pending_(spec.accounts)
{
    addresses_.reserve(spec_.accounts);
    for (std::uint64_t i = 0; i < spec_.accounts; ++i) {
        addresses_.push_back(workload_address(spec_.seed, i));
    }
    for (std::size_t i = 0; i < kCodePoolSize; ++i) {
        Code code(1 + uniform_below(rng_, kMaxGeneratedCode));
        for (auto& b : code) {
            b = static_cast<std::uint8_t>(rng_());
        }
        code_pool_.push_back(std::move(code));
    }
}

AccountUpdate& WorkloadGenerator::touch(std::vector<AccountUpdate*>& order, std::uint64_t index)
{
    auto& slot = pending_[index];
    if (!slot) {
        slot.emplace();
        slot->address = addresses_[index];
        touched_.push_back(index);
        order.push_back(&*slot);
    }
    return *slot;
}

WorkloadBlock WorkloadGenerator::next()
{
    WorkloadBlock out;
    out.diff.block = next_block_++;
    out.tx_count = spec_.txs_per_block;
    std::vector<AccountUpdate*> order;

    auto ensure_exists = [&](std::uint64_t i, bool may_get_code) {
        AccountState& st = state_[i];
        if (st.exists) {
            return;
        }
        AccountUpdate& u = touch(order, i);
        u.created = true;
        st.exists = true;
        st.balance = static_cast<unsigned __int128>(kUnitBalance) * (1 + uniform_below(rng_, 1000));
        st.nonce = 0;
        u.balance = balance_from_u128(st.balance);
        u.nonce = Nonce{0};
        if (may_get_code && uniform_unit(rng_) < kCodeRatio) {
            u.code = code_pool_[uniform_below(rng_, code_pool_.size())];
        }
    };
    auto deleted_here = [&](std::uint64_t i) { return pending_[i] && pending_[i]->deleted; };

    for (std::uint32_t tx = 0; tx < spec_.txs_per_block; ++tx) {
        const std::uint64_t sender = popularity_(rng_);
        const std::uint64_t receiver = uniform_below(rng_, spec_.accounts);
        if (!deleted_here(sender) && !deleted_here(receiver)) {
            ensure_exists(sender, false);
            ensure_exists(receiver, true);
            AccountState& from = state_[sender];
            const unsigned __int128 amount =
                std::min<unsigned __int128>(from.balance, 1 + uniform_below(rng_, 1'000'000));
            from.balance -= amount;
            from.nonce += 1;
            state_[receiver].balance += amount;
            AccountUpdate& su = touch(order, sender);
            su.balance = balance_from_u128(from.balance);
            su.nonce = Nonce{from.nonce};
            AccountUpdate& ru = touch(order, receiver);
            ru.balance = balance_from_u128(state_[receiver].balance);

            AccountState& to = state_[receiver];
            for (std::uint32_t w = 0; w < spec_.slot_writes_per_tx; ++w) {
                std::uint64_t key_index;
                if (to.keys == 0 || uniform_unit(rng_) < spec_.new_key_ratio) {
                    key_index = to.keys++;
                } else {
                    key_index = uniform_below(rng_, to.keys);
                }
                StorageValue value;
                if (uniform_unit(rng_) >= kClearRatio) {
                    put_be64(value.bytes.data() + 24, rng_() | 1);
                    put_be64(value.bytes.data() + 16, rng_());
                }
                ru.slots.emplace_back(workload_key(addresses_[receiver], key_index), value);
            }
        }
        if (uniform_unit(rng_) < spec_.delete_ratio) {
            const std::uint64_t victim = popularity_(rng_);
            if (state_[victim].exists && !pending_[victim]) {
                AccountUpdate& u = touch(order, victim);
                u.deleted = true;
                state_[victim] = AccountState{};
            }
        }
    }

    out.diff.updates.reserve(order.size());
    for (AccountUpdate* u : order) {
        dedupe_slots(*u);
        out.diff.updates.push_back(std::move(*u));
    }
    for (const auto i : touched_) {
        pending_[i].reset();
    }
    touched_.clear();
    std::sort(out.diff.updates.begin(), out.diff.updates.end(),
              [](const AccountUpdate& a, const AccountUpdate& b) { return a.address < b.address; });
    return out;
}

std::vector<WorkloadBlock> generate_workload(const WorkloadSpec& spec)
{
    WorkloadGenerator gen{spec};
    std::vector<WorkloadBlock> out;
    out.reserve(spec.blocks);
    while (!gen.done()) {
        out.push_back(gen.next());
    }
    return out;
}

namespace {

class WorkloadWriter {
public:
    WorkloadWriter(const std::filesystem::path& path, std::uint64_t count) : path_{path}, out_{path, std::ios::binary}
    {
        if (!out_) {
            throw StorageError(path, 0, "cannot create workload file");
        }
        std::uint8_t header[16];
        std::memcpy(header, kMagic, 8);
        put_be64(header + 8, count);
        write(header, sizeof(header));
    }

    void add(const WorkloadBlock& b)
    {
        const Bytes body = encode_block_diff(b.diff);
        std::uint8_t head[8];
        put_be32(head, static_cast<std::uint32_t>(body.size()));
        put_be32(head + 4, b.tx_count);
        write(head, sizeof(head));
        write(body.data(), body.size());
    }

    void finish()
    {
        out_.flush();
        if (!out_) {
            throw StorageError(path_, offset_, "workload write failed");
        }
    }

private:
    void write(const std::uint8_t* p, std::size_t n)
    {
        out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out_) {
            throw StorageError(path_, offset_, "workload write failed");
        }
        offset_ += n;
    }

    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t offset_ = 0;
};

} // namespace

void write_workload(const std::filesystem::path& path, const WorkloadSpec& spec)
{
    WorkloadGenerator gen{spec};
    WorkloadWriter w{path, spec.blocks};
    while (!gen.done()) {
        w.add(gen.next());
    }
    w.finish();
}

void write_workload(const std::filesystem::path& path, const std::vector<WorkloadBlock>& blocks)
{
    WorkloadWriter w{path, blocks.size()};
    for (const auto& b : blocks) {
        w.add(b);
    }
    w.finish();
}

WorkloadReader::WorkloadReader(const std::filesystem::path& path) : in_{path, std::ios::binary}, path_{path}
{
    if (!in_) {
        throw StorageError(path, 0, "cannot open workload file");
    }
    char header[16];
    if (!in_.read(header, sizeof(header))) {
        throw ParseError("workload file " + path.string() + " has a truncated header");
    }
    if (std::memcmp(header, kMagic, 8) != 0) {
        throw ParseError("workload file " + path.string() + " has a bad magic");
    }
    count_ = get_be64(reinterpret_cast<const std::uint8_t*>(header + 8));
}

std::optional<WorkloadBlock> WorkloadReader::next()
{
    if (read_ == count_) {
        return std::nullopt;
    }
    std::uint8_t head[8];
    if (!in_.read(reinterpret_cast<char*>(head), sizeof(head))) {
        throw ParseError("workload record " + std::to_string(read_ + 1) + " is truncated");
    }
    Bytes body(get_be32(head));
    if (!in_.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()))) {
        throw ParseError("workload record " + std::to_string(read_ + 1) + " is truncated");
    }
    WorkloadBlock b;
    b.tx_count = get_be32(head + 4);
    b.diff = decode_block_diff(body);
    ++read_;
    return b;
}

std::vector<WorkloadBlock> read_workload(const std::filesystem::path& path)
{
    WorkloadReader r{path};
    std::vector<WorkloadBlock> out;
    while (auto b = r.next()) {
        out.push_back(std::move(*b));
    }
    return out;
}

} // namespace statedb
