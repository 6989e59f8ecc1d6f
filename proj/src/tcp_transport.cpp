#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "wirebench/errors.hpp"
#include "wirebench/transport.hpp"

namespace wirebench {

namespace {

std::string errno_text(const char* what) {
    return std::string(what) + ": " + std::strerror(errno);
}

void put_u32le(std::byte* out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

void put_u64le(std::byte* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32le(const std::byte* in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(in[i])) << (8 * i);
    return v;
}

std::uint64_t get_u64le(const std::byte* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(in[i])) << (8 * i);
    return v;
}

class Fd {
  public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(Fd&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Fd& operator=(Fd&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }

    void reset() {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = -1;
    }
    int get() const { return fd_; }

  private:
    int fd_ = -1;
};

struct Resolved {
    sockaddr_storage addr{};
    socklen_t len = 0;
    int family = AF_INET;
};

Resolved resolve(const Endpoint& ep, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = passive ? AI_PASSIVE : 0;

    const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
    const std::string port = std::to_string(ep.port);
    addrinfo* result = nullptr;
    const int rc = ::getaddrinfo(host, port.c_str(), &hints, &result);
    if (rc != 0)
        throw TransportError("resolve '" + ep.host + "': " + gai_strerror(rc));

    Resolved r;
    std::memcpy(&r.addr, result->ai_addr, result->ai_addrlen);
    r.len = static_cast<socklen_t>(result->ai_addrlen);
    r.family = result->ai_family;
    ::freeaddrinfo(result);
    return r;
}

void set_nodelay(int fd, bool on) {
    const int v = on ? 1 : 0;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &v, sizeof(v));
}

void set_recv_timeout(int fd, std::uint64_t ms) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(ms / 1000);
    tv.tv_usec = static_cast<suseconds_t>((ms % 1000) * 1000);
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

class TcpConnection final : public Connection {
  public:
    TcpConnection(Fd fd, const BenchmarkConfig& config) : fd_(std::move(fd)) {
        // Latency-style patterns need every message on the wire at once;
        // throughput paths keep the stack's coalescing.
        set_nodelay(fd_.get(), config.is_latency_mode());
        handshake_timeout_ms_ = config.handshake_timeout_ms;
    }

    void send_blocking(std::span<const std::byte> payload) override {
        const std::byte* p = payload.data();
        std::size_t left = payload.size();
        while (left > 0) {
            const ssize_t n = ::send(fd_.get(), p, left, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw TransportError(errno_text("send"));
            }
            p += n;
            left -= static_cast<std::size_t>(n);
        }
    }

    void recv_blocking(std::span<std::byte> out) override {
        std::byte* p = out.data();
        std::size_t got = 0;
        while (got < out.size()) {
            const ssize_t n = ::recv(fd_.get(), p + got, out.size() - got, 0);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw TransportError(errno_text("recv"));
            }
            if (n == 0)
                throw TransportError("recv: peer closed after " + std::to_string(got) +
                                     " of " + std::to_string(out.size()) + " bytes");
            got += static_cast<std::size_t>(n);
        }
    }

    void negotiate(const HandshakeInfo& local) override {
        const auto frame = local.encode();
        set_recv_timeout(fd_.get(), handshake_timeout_ms_);
        send_blocking(frame);
        std::array<std::byte, HandshakeInfo::frame_size> peer_frame;
        try {
            recv_blocking(peer_frame);
        } catch (const TransportError& e) {
            throw TransportError(std::string("handshake: ") + e.what());
        }
        set_recv_timeout(fd_.get(), 0);

        const HandshakeInfo peer = HandshakeInfo::decode(peer_frame);
        if (peer.mode != local.mode)
            throw TransportError("handshake: mode mismatch (local " +
                                 std::string(to_string(local.mode)) + ", peer " +
                                 to_string(peer.mode) + ")");
        if (peer.payload_size != local.payload_size)
            throw TransportError("handshake: payload_size mismatch (local " +
                                 std::to_string(local.payload_size) + ", peer " +
                                 std::to_string(peer.payload_size) + ")");
        if (peer.message_count != local.message_count)
            throw TransportError("handshake: message_count mismatch (local " +
                                 std::to_string(local.message_count) + ", peer " +
                                 std::to_string(peer.message_count) + ")");
        info_ = local;
    }

    void abort_hard() override { ::shutdown(fd_.get(), SHUT_RDWR); }

  private:
    Fd fd_;
    std::uint64_t handshake_timeout_ms_ = 30'000;
};

}  // namespace

std::array<std::byte, HandshakeInfo::frame_size> HandshakeInfo::encode() const {
    std::array<std::byte, frame_size> frame{};
    for (std::size_t i = 0; i < magic.size(); ++i)
        frame[i] = static_cast<std::byte>(magic[i]);
    frame[4] = static_cast<std::byte>(version);
    frame[5] = static_cast<std::byte>(mode);
    put_u32le(frame.data() + 6, payload_size);
    put_u64le(frame.data() + 10, message_count);
    return frame;
}

HandshakeInfo HandshakeInfo::decode(std::span<const std::byte, frame_size> frame) {
    for (std::size_t i = 0; i < magic.size(); ++i)
        if (frame[i] != static_cast<std::byte>(magic[i]))
            throw TransportError("handshake: not a wirebench peer");
    const auto peer_version = std::to_integer<std::uint8_t>(frame[4]);
    if (peer_version != version)
        throw TransportError("handshake: version mismatch (peer " +
                             std::to_string(peer_version) + ")");
    const auto mode_byte = std::to_integer<std::uint8_t>(frame[5]);
    if (mode_byte > static_cast<std::uint8_t>(Mode::OVERHEAD))
        throw TransportError("handshake: unknown mode ordinal " + std::to_string(mode_byte));

    HandshakeInfo info;
    info.mode = static_cast<Mode>(mode_byte);
    info.payload_size = get_u32le(frame.data() + 6);
    info.message_count = get_u64le(frame.data() + 10);
    return info;
}

std::vector<std::byte> Connection::recv_bytes(std::size_t length) {
    std::vector<std::byte> out(length);
    if (length > 0)
        recv_blocking(out);
    return out;
}

HandshakeInfo initial_handshake(const BenchmarkConfig& config) {
    HandshakeInfo info;
    info.mode = config.mode;
    info.payload_size = static_cast<std::uint32_t>(config.min_size);
    info.message_count = config.base_count;
    return info;
}

ConnectionPtr tcp_listen(const Endpoint& endpoint, const BenchmarkConfig& config) {
    const Resolved r = resolve(endpoint, /*passive=*/true);
    Fd listener(::socket(r.family, SOCK_STREAM, 0));
    if (listener.get() < 0)
        throw TransportError(errno_text("socket"));

    const int one = 1;
    ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(listener.get(), reinterpret_cast<const sockaddr*>(&r.addr), r.len) != 0)
        throw TransportError(errno_text("bind"));
    if (::listen(listener.get(), 1) != 0)
        throw TransportError(errno_text("listen"));

    pollfd pfd{listener.get(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(config.handshake_timeout_ms));
    if (ready < 0)
        throw TransportError(errno_text("poll"));
    if (ready == 0)
        throw TransportError("accept: no client within " +
                             std::to_string(config.handshake_timeout_ms) + " ms");

    Fd accepted(::accept(listener.get(), nullptr, nullptr));
    if (accepted.get() < 0)
        throw TransportError(errno_text("accept"));

    auto conn = std::make_unique<TcpConnection>(std::move(accepted), config);
    conn->negotiate(initial_handshake(config));
    return conn;
}

ConnectionPtr tcp_connect(const Endpoint& endpoint, const BenchmarkConfig& config) {
    const Resolved r = resolve(endpoint, /*passive=*/false);
    Fd fd(::socket(r.family, SOCK_STREAM, 0));
    if (fd.get() < 0)
        throw TransportError(errno_text("socket"));
    if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&r.addr), r.len) != 0)
        throw TransportError(errno_text("connect"));

    auto conn = std::make_unique<TcpConnection>(std::move(fd), config);
    conn->negotiate(initial_handshake(config));
    return conn;
}

}  // namespace wirebench
