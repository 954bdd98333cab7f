#include <arpa/inet.h>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sstream>
#include <sys/socket.h>
#include <unistd.h>

#include "cli.hpp"
#include "statedb/errors.hpp"

namespace statedb::cli {

namespace {

constexpr std::size_t kMaxLine = 4096;

std::vector<std::string> split_words(const std::string& line)
{
    std::istringstream in{line};
    std::vector<std::string> out;
    for (std::string w; in >> w;) {
        out.push_back(std::move(w));
    }
    return out;
}

BlockNumber parse_block(const std::string& s)
{
    BlockNumber b = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), b);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw ParseError("bad block number '" + s + "'");
    }
    return b;
}

void expect_args(const std::vector<std::string>& words, std::size_t n, const char* usage)
{
    if (words.size() != n + 1) {
        throw ParseError(std::string("usage: ") + usage);
    }
}

std::string dispatch(const ArchiveDb& archive, const std::vector<std::string>& w)
{
    std::string cmd = w[0];
    for (auto& c : cmd) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (cmd == "WATERMARK") {
        expect_args(w, 0, "WATERMARK");
        return std::to_string(archive.watermark());
    }
    if (cmd == "BALANCE") {
        expect_args(w, 2, "BALANCE <address> <block>");
        return balance_to_decimal(archive.get_balance_at(Address::from_hex(w[1]), parse_block(w[2])));
    }
    if (cmd == "NONCE") {
        expect_args(w, 2, "NONCE <address> <block>");
        return std::to_string(archive.get_nonce_at(Address::from_hex(w[1]), parse_block(w[2])).value);
    }
    if (cmd == "CODE") {
        expect_args(w, 2, "CODE <address> <block>");
        return to_hex(archive.get_code_at(Address::from_hex(w[1]), parse_block(w[2])));
    }
    if (cmd == "EXISTS") {
        expect_args(w, 2, "EXISTS <address> <block>");
        return archive.account_exists_at(Address::from_hex(w[1]), parse_block(w[2])) ? "1" : "0";
    }
    if (cmd == "STORAGE") {
        expect_args(w, 3, "STORAGE <address> <key> <block>");
        return archive.get_storage_at(Address::from_hex(w[1]), StorageKey::from_hex(w[2]), parse_block(w[3])).hex();
    }
    if (cmd == "BLOCKHASH") {
        expect_args(w, 1, "BLOCKHASH <block>");
        return archive.block_hash(parse_block(w[1])).hex();
    }
    if (cmd == "ACCOUNTHASH") {
        expect_args(w, 2, "ACCOUNTHASH <address> <block>");
        return archive.account_hash_at(Address::from_hex(w[1]), parse_block(w[2])).hex();
    }
    throw ParseError("unknown command '" + w[0] + "'");
}

std::string one_line(std::string s)
{
    for (auto& c : s) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return s;
}

bool send_all(int fd, const std::string& data)
{
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            return false;
        }
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

} // namespace

std::string handle_request(const ArchiveDb& archive, const std::string& line)
{
    const auto words = split_words(line);
    if (words.empty()) {
        return "ERR PARSE empty request";
    }
    try {
        return "OK " + dispatch(archive, words);
    } catch (const ParseError& e) {
        return "ERR PARSE " + one_line(e.what());
    } catch (const FormatError& e) {
        return "ERR PARSE " + one_line(e.what());
    } catch (const NotAvailableError& e) {
        return "ERR NOT_AVAILABLE " + one_line(e.what());
    } catch (const std::exception& e) {
        return "ERR INTERNAL " + one_line(e.what());
    }
}

std::pair<std::string, std::uint16_t> parse_listen(const std::string& addr)
{
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        throw ParseError("listen address must be host:port");
    }
    unsigned port = 0;
    const std::string p = addr.substr(colon + 1);
    const auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), port);
    if (ec != std::errc{} || end != p.data() + p.size() || port > 65535) {
        throw ParseError("bad port '" + p + "'");
    }
    return {addr.substr(0, colon), static_cast<std::uint16_t>(port)};
}

QueryServer::QueryServer(const ArchiveDb& archive, const std::string& host, std::uint16_t port) : archive_{archive}
{
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (host.empty() || host == "*") {
        sa.sin_addr.s_addr = htonl(INADDR_ANY);
    } else if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &sa.sin_addr) != 1) {
        throw ParseError("bad listen host '" + host + "'");
    }
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (listen_fd_ < 0) {
        throw Error(std::string("socket: ") + std::strerror(errno));
    }
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0 || ::listen(listen_fd_, 64) != 0) {
        const std::string msg = std::strerror(errno);
        ::close(listen_fd_);
        throw Error("cannot listen on " + host + ":" + std::to_string(port) + ": " + msg);
    }
    socklen_t len = sizeof(sa);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);
}

QueryServer::~QueryServer()
{
    stop();
    for (auto& t : workers_) {
        if (t.joinable()) {
            t.join();
        }
    }
    ::close(listen_fd_);
}

void QueryServer::stop()
{
    stopping_ = true;
    std::lock_guard lock{conn_mu_};
    for (const int fd : conn_fds_) {
        ::shutdown(fd, SHUT_RDWR);
    }
}

void QueryServer::run()
{
    while (!stopping_) {
        pollfd p{listen_fd_, POLLIN, 0};
        const int r = ::poll(&p, 1, 100);
        if (r <= 0) {
            continue;
        }
        const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            continue;
        }
        std::lock_guard lock{conn_mu_};
        if (stopping_) {
            ::close(fd);
            break;
        }
        conn_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void QueryServer::serve_connection(int fd)
{
    std::string buffer;
    char chunk[4096];
    bool overlong = false;
    for (;;) {
        const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            break;
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
        bool quit = false;
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (overlong || line.size() > kMaxLine) {
                overlong = false;
                if (!send_all(fd, "ERR PARSE request too long\n")) {
                    quit = true;
                    break;
                }
                continue;
            }
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            const auto words = split_words(line);
            if (words.size() == 1 && (words[0] == "QUIT" || words[0] == "quit")) {
                quit = true;
                break;
            }
            if (!send_all(fd, handle_request(archive_, line) + "\n")) {
                quit = true;
                break;
            }
        }
        if (quit) {
            break;
        }
        if (buffer.size() > kMaxLine) {
            overlong = true;
            buffer.clear();
        }
    }
    std::lock_guard lock{conn_mu_};
    std::erase(conn_fds_, fd);
    ::close(fd);
}

} // namespace statedb::cli
