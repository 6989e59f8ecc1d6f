#include "wirebench/overhead.hpp"

#include "wirebench/errors.hpp"

namespace wirebench {

const char* to_string(TransportKind kind) {
    switch (kind) {
        case TransportKind::RC_MSG: return "rc-msg";
        case TransportKind::RC_RDMA_WRITE: return "rc-rdma-write";
        case TransportKind::RC_RDMA_READ: return "rc-rdma-read";
        case TransportKind::UD_IPOIB: return "ud-ipoib";
        case TransportKind::UD_LIBVMA: return "ud-libvma";
        case TransportKind::RAW_STREAM: return "tcp";
    }
    return "?";
}

std::uint64_t packet_count(std::uint64_t payload, std::uint64_t mtu) {
    if (mtu == 0)
        throw ConfigError("mtu: must be >= 1");
    if (payload == 0)
        return 1;
    return (payload + mtu - 1) / mtu;
}

std::uint64_t per_packet_header(TransportKind kind) {
    switch (kind) {
        case TransportKind::RC_MSG:
            return hdr::rc_base;
        case TransportKind::RC_RDMA_WRITE:
        case TransportKind::RC_RDMA_READ:
            return hdr::rc_base + hdr::reth;
        case TransportKind::UD_IPOIB:
            return hdr::rc_base + hdr::deth + hdr::ipoib_encap + hdr::ipv4;
        case TransportKind::UD_LIBVMA:
            return hdr::rc_base + hdr::deth + hdr::vma_addr + hdr::eth_frame;
        case TransportKind::RAW_STREAM:
            throw ConfigError("tcp stream: no fixed framing model");
    }
    throw ConfigError("unknown transport kind");
}

std::uint64_t per_message_wire_bytes(TransportKind kind, std::uint64_t payload,
                                     std::uint64_t mtu) {
    return payload + packet_count(payload, mtu) * per_packet_header(kind);
}

double overhead_percent(TransportKind kind, std::uint64_t payload, std::uint64_t mtu) {
    if (payload == 0)
        throw ConfigError("overhead_percent: undefined for zero payload");
    const std::uint64_t wire = per_message_wire_bytes(kind, payload, mtu);
    return 100.0 * static_cast<double>(wire - payload) / static_cast<double>(payload);
}

OverheadReport analytic_report(TransportKind kind, std::uint64_t payload,
                               std::uint64_t mtu) {
    OverheadReport r;
    r.payload_size = payload;
    r.packets = packet_count(payload, mtu);
    r.overhead_bytes = r.packets * per_packet_header(kind);
    r.wire_bytes_per_message = payload + r.overhead_bytes;
    r.overhead_percent = payload == 0
                             ? 0.0
                             : 100.0 * static_cast<double>(r.overhead_bytes) /
                                   static_cast<double>(payload);
    return r;
}

OverheadReport compare_counters(TransportKind kind, std::uint64_t payload_size,
                                std::uint64_t mtu, std::uint64_t measured_xmit,
                                std::uint64_t payload_total, std::uint64_t messages) {
    if (messages == 0)
        throw ConfigError("compare_counters: messages must be >= 1");
    if (measured_xmit < payload_total)
        throw ConfigError("compare_counters: counter below payload total (" +
                          std::to_string(measured_xmit) + " < " +
                          std::to_string(payload_total) + ")");

    OverheadReport r = analytic_report(kind, payload_size, mtu);
    const double measured_per_msg =
        static_cast<double>(measured_xmit - payload_total) / static_cast<double>(messages);
    r.residual_unmodeled = measured_per_msg - static_cast<double>(r.overhead_bytes);
    r.accounting_anomaly = r.residual_unmodeled < 0.0;
    return r;
}

}  // namespace wirebench
