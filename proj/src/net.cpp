#include "epmon/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace epmon::net {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw std::runtime_error(what + ": " + std::strerror(errno));
}

sockaddr_in parse_addr(const std::string& host_port) {
    auto colon = host_port.rfind(':');
    if (colon == std::string::npos)
        throw std::runtime_error("address must be host:port, got '" + host_port + "'");
    std::string host = host_port.substr(0, colon);
    int port = std::stoi(host_port.substr(colon + 1));
    if (port < 0 || port > 65535)
        throw std::runtime_error("bad port in '" + host_port + "'");

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (host.empty() || host == "*")
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
    else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw std::runtime_error("bad IPv4 host in '" + host_port + "'");
    return addr;
}

std::string format_addr(const sockaddr_in& addr) {
    char buf[INET_ADDRSTRLEN] = {};
    inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof buf);
    return std::string(buf) + ":" + std::to_string(ntohs(addr.sin_port));
}

}  // namespace

Fd& Fd::operator=(Fd&& other) noexcept {
    if (this != &other) {
        reset();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

Fd::~Fd() { reset(); }

int Fd::release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
}

void Fd::reset() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

Fd tcp_listen(const std::string& host_port, int backlog) {
    sockaddr_in addr = parse_addr(host_port);
    Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) throw_errno("socket");
    int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw_errno("bind " + host_port);
    if (::listen(fd.get(), backlog) != 0) throw_errno("listen " + host_port);
    return fd;
}

Fd tcp_accept(int listen_fd) {
    int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd < 0) return Fd{};  // listener closed or interrupted
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return Fd(fd);
}

Fd tcp_connect(const std::string& host_port) {
    sockaddr_in addr = parse_addr(host_port);
    Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) throw_errno("socket");
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw_errno("connect " + host_port);
    int one = 1;
    ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return fd;
}

std::string local_address(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        throw_errno("getsockname");
    return format_addr(addr);
}

std::string peer_address(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getpeername(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        return "unknown";
    return format_addr(addr);
}

std::pair<Fd, Fd> stream_pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw_errno("socketpair");
    return {Fd(fds[0]), Fd(fds[1])};
}

void shutdown_socket(int fd) {
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

void send_all(int fd, std::span<const std::uint8_t> data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("send");
        }
        sent += static_cast<std::size_t>(n);
    }
}

void send_all(int fd, std::string_view data) {
    send_all(fd, std::span<const std::uint8_t>(
                     reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::vector<std::uint8_t> recv_some(int fd, std::size_t max) {
    std::vector<std::uint8_t> buf(max);
    for (;;) {
        ssize_t n = ::recv(fd, buf.data(), buf.size(), 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == ECONNRESET) return {};
            throw_errno("recv");
        }
        buf.resize(static_cast<std::size_t>(n));
        return buf;
    }
}

std::optional<std::vector<std::uint8_t>> recv_nonblocking(int fd, std::size_t max) {
    std::vector<std::uint8_t> buf(max);
    ssize_t n = ::recv(fd, buf.data(), buf.size(), MSG_DONTWAIT);
    if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)
            return std::vector<std::uint8_t>{};
        return std::nullopt;  // reset or otherwise unusable
    }
    if (n == 0) return std::nullopt;  // orderly close
    buf.resize(static_cast<std::size_t>(n));
    return buf;
}

std::optional<std::string> LineReader::read_line() {
    for (;;) {
        auto nl = buf_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buf_.substr(0, nl);
            buf_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        if (eof_) return std::nullopt;
        auto chunk = recv_some(fd_);
        if (chunk.empty()) {
            eof_ = true;  // an unterminated trailing fragment is dropped
            continue;
        }
        buf_.append(reinterpret_cast<const char*>(chunk.data()), chunk.size());
    }
}

void send_line(int fd, std::string_view line) {
    std::string out(line);
    out.push_back('\n');
    send_all(fd, out);
}

}  // namespace epmon::net
