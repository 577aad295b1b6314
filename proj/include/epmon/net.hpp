#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace epmon::net {

// Move-only owner of a file descriptor.
class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(Fd&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Fd& operator=(Fd&& other) noexcept;
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd();

    int get() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    int release();
    void reset();

private:
    int fd_ = -1;
};

// Addresses are "host:port", IPv4. Port 0 binds an ephemeral port; use
// local_address() to discover it.
Fd tcp_listen(const std::string& host_port, int backlog = 8);
Fd tcp_accept(int listen_fd);  // blocking; invalid Fd when the socket was closed
Fd tcp_connect(const std::string& host_port);
std::string local_address(int fd);
std::string peer_address(int fd);

// AF_UNIX stream pair for in-process board<->collector plumbing.
std::pair<Fd, Fd> stream_pair();

// Unblock and invalidate a socket another thread is blocked on.
void shutdown_socket(int fd);

void send_all(int fd, std::span<const std::uint8_t> data);  // throws on error
void send_all(int fd, std::string_view data);

// Blocking read of whatever is available; empty = EOF. Throws on error.
std::vector<std::uint8_t> recv_some(int fd, std::size_t max = 65536);

// Non-blocking read: nullopt = connection closed, empty = nothing pending.
std::optional<std::vector<std::uint8_t>> recv_nonblocking(int fd, std::size_t max = 65536);

// Buffered line reader for the request/response protocol; strips trailing
// \n or \r\n. nullopt = EOF with no pending line.
class LineReader {
public:
    explicit LineReader(int fd) : fd_(fd) {}
    std::optional<std::string> read_line();

private:
    int fd_;
    std::string buf_;
    bool eof_ = false;
};

void send_line(int fd, std::string_view line);  // appends '\n'

}  // namespace epmon::net
