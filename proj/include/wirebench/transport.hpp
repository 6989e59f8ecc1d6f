#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "wirebench/config.hpp"

namespace wirebench {

// Benchmark-parameter handshake. Both peers exchange one frame per
// negotiation; any field disagreement rejects the connection.
struct HandshakeInfo {
    static constexpr std::array<char, 4> magic = {'W', 'B', 'J', '1'};
    static constexpr std::uint8_t version = 1;
    static constexpr std::size_t frame_size = 18;

    Mode mode = Mode::UNIDIR;
    std::uint32_t payload_size = 0;
    std::uint64_t message_count = 0;

    // Wire layout (little-endian): magic[4], version u8, mode u8,
    // payload_size u32, message_count u64.
    std::array<std::byte, frame_size> encode() const;
    // Validates magic and version; throws TransportError otherwise.
    static HandshakeInfo decode(std::span<const std::byte, frame_size> frame);
};

// Blocking full-duplex byte channel between two benchmark peers. One
// thread may send while another receives; no other sharing.
class Connection {
  public:
    virtual ~Connection() = default;

    // Blocks until the channel accepted all bytes. Stream semantics:
    // acceptance does not imply remote delivery.
    virtual void send_blocking(std::span<const std::byte> payload) = 0;

    // Blocks until exactly out.size() bytes arrived, looping over short
    // reads. EOF mid-message throws with the byte count received so far.
    virtual void recv_blocking(std::span<std::byte> out) = 0;

    // Exchanges one handshake frame and checks the peer sent an equal
    // one. Used at connection setup and again per schedule point.
    // Single-threaded use only.
    virtual void negotiate(const HandshakeInfo& local) = 0;

    // Hard-closes both directions; blocked send/recv calls on other
    // threads fail promptly. Used by the progress watchdog.
    virtual void abort_hard() = 0;

    const HandshakeInfo& info() const { return info_; }

    // Convenience for tests.
    std::vector<std::byte> recv_bytes(std::size_t length);

  protected:
    HandshakeInfo info_;
};

using ConnectionPtr = std::unique_ptr<Connection>;

// Blocks until one client connects and the handshake validates.
// The initial handshake carries (mode, min_size, base_count).
ConnectionPtr tcp_listen(const Endpoint& endpoint, const BenchmarkConfig& config);

// Client-side counterpart of tcp_listen.
ConnectionPtr tcp_connect(const Endpoint& endpoint, const BenchmarkConfig& config);

HandshakeInfo initial_handshake(const BenchmarkConfig& config);

}  // namespace wirebench
