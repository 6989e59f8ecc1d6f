#pragma once

#include <cstdint>
#include <string>

namespace wirebench {

// Wire model selector. The RC kinds are runnable on the simulated verbs
// transport; the UD kinds exist for the analytic model only; RAW_STREAM
// (TCP) has no fixed framing model and is excluded from header math.
enum class TransportKind {
    RC_MSG,
    RC_RDMA_WRITE,
    RC_RDMA_READ,
    UD_IPOIB,
    UD_LIBVMA,
    RAW_STREAM,
};

const char* to_string(TransportKind kind);

// InfiniBand packet header components, bytes.
namespace hdr {
constexpr std::uint64_t lrh = 8;    // local routing header
constexpr std::uint64_t bth = 12;   // base transport header
constexpr std::uint64_t icrc = 4;   // invariant CRC
constexpr std::uint64_t vcrc = 2;   // variant CRC
constexpr std::uint64_t rc_base = lrh + bth + icrc + vcrc;  // 26
constexpr std::uint64_t reth = 16;  // RDMA extended transport header
constexpr std::uint64_t deth = 8;   // datagram extended transport header
constexpr std::uint64_t ipoib_encap = 4;
constexpr std::uint64_t ipv4 = 20;  // without options
constexpr std::uint64_t eth_frame = 14;
constexpr std::uint64_t vma_addr = 4;
}  // namespace hdr

struct OverheadReport {
    std::uint64_t payload_size = 0;
    std::uint64_t packets = 0;
    std::uint64_t wire_bytes_per_message = 0;  // analytic: payload + overhead
    std::uint64_t overhead_bytes = 0;          // analytic per-message header bytes
    double overhead_percent = 0.0;             // 100 * overhead_bytes / payload
    // Counter comparison only: measured per-message overhead minus the
    // analytic overhead. Positive residual is unattributed software
    // protocol data; negative means the counter undershot the model.
    double residual_unmodeled = 0.0;
    bool accounting_anomaly = false;  // residual_unmodeled < 0
};

// max(1, ceil(payload / mtu)); zero-payload messages still occupy a packet.
std::uint64_t packet_count(std::uint64_t payload, std::uint64_t mtu);

// Fixed header bytes charged per packet for the given kind.
// Throws ConfigError for RAW_STREAM (no fixed framing model).
std::uint64_t per_packet_header(TransportKind kind);

// payload + packet_count(payload, mtu) * per_packet_header(kind)
std::uint64_t per_message_wire_bytes(TransportKind kind, std::uint64_t payload,
                                     std::uint64_t mtu);

// 100 * (wire - payload) / payload. Throws ConfigError for payload == 0.
double overhead_percent(TransportKind kind, std::uint64_t payload, std::uint64_t mtu);

// Pure analytic report for one message, residual zero.
OverheadReport analytic_report(TransportKind kind, std::uint64_t payload,
                               std::uint64_t mtu);

// Compares a measured transmit counter against payload totals for a
// uniform-size run of `messages` messages. measured_xmit must cover at
// least the payload, otherwise the accounting is broken and this throws.
OverheadReport compare_counters(TransportKind kind, std::uint64_t payload_size,
                                std::uint64_t mtu, std::uint64_t measured_xmit,
                                std::uint64_t payload_total, std::uint64_t messages);

}  // namespace wirebench
