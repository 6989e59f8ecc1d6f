#pragma once

#include <cstdint>
#include <string>

#include "wirebench/overhead.hpp"

namespace wirebench {

// Ordinals are wire-stable: byte 5 of the handshake frame.
enum class Mode : std::uint8_t {
    UNIDIR = 0,
    BIDIR = 1,
    LATENCY = 2,
    PINGPONG = 3,
    OVERHEAD = 4,
};

enum class Role { SERVER, CLIENT };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);
TransportKind parse_transport(const std::string& text);

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};

// "host:port"; a missing host binds/connects to 0.0.0.0 / localhost.
Endpoint parse_endpoint(const std::string& text);

// Full parameterization of one benchmark invocation.
struct BenchmarkConfig {
    Mode mode = Mode::UNIDIR;
    TransportKind transport = TransportKind::RC_MSG;
    Role role = Role::CLIENT;
    Endpoint endpoint;

    std::uint64_t base_count = 1'000'000;  // messages at the smallest size
    std::uint64_t min_size = 1;
    std::uint64_t max_size = 1024 * 1024;
    std::uint64_t halve_from = 8 * 1024;  // first size with a halved count
    std::uint32_t queue_depth = 128;
    std::uint32_t post_batch = 1;  // 10 models the batched-post path
    std::uint32_t runs = 3;
    std::uint64_t mtu = 4096;
    std::uint64_t rnr_delay_us = 100;
    std::uint64_t warmup_count = 0;  // messages excluded from stats
    std::string out_dir = ".";

    std::uint32_t max_rnr_retries = 7;
    std::uint64_t sim_latency_ns = 1000;  // simulated one-way service time
    std::uint64_t handshake_timeout_ms = 30'000;
    std::uint64_t watchdog_timeout_ms = 60'000;
    bool verify_payload = false;  // byte-compare pongs in ping-pong runs

    bool is_sim() const { return transport != TransportKind::RAW_STREAM; }
    bool is_latency_mode() const {
        return mode == Mode::LATENCY || mode == Mode::PINGPONG || mode == Mode::OVERHEAD;
    }
};

// Checks every invariant and returns the normalized config: LATENCY,
// PINGPONG and OVERHEAD runs get queue_depth and post_batch rewritten
// to 1 (one message in flight; OVERHEAD measures aggregation-free).
// All violations are collected and reported together, by field name.
BenchmarkConfig validate_config(const BenchmarkConfig& config);

}  // namespace wirebench
