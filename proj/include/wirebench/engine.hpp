#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wirebench/config.hpp"
#include "wirebench/schedule.hpp"
#include "wirebench/simverbs.hpp"
#include "wirebench/stats.hpp"
#include "wirebench/transport.hpp"

namespace wirebench {

// One (payload size, run) measurement. Simulated transports report in
// logical nanoseconds, stream transports in monotonic wall time.
struct RunReport {
    std::uint64_t payload_size = 0;
    std::uint32_t run_index = 1;
    std::uint64_t messages = 0;  // measured messages (2x the point count for bidir)
    std::uint64_t elapsed_ns = 0;
    std::optional<LatencySamples> latency_samples;
    std::optional<std::uint64_t> wire_bytes;  // both simulated ports summed
    std::optional<std::uint64_t> rnr_naks;
};

struct PaceOptions {
    WorkOp op = WorkOp::SEND;
    std::uint32_t payload_size = 0;
    std::span<std::byte> send_buffer;
    // Invoked once per loop iteration, before the clock advances; the
    // peer's receive queue is serviced here.
    std::function<void()> service_peer;
    bool record_refill_groups = false;
};

struct PaceResult {
    std::uint64_t elapsed_ns = 0;
    std::uint64_t completions = 0;
    std::uint32_t max_occupancy = 0;
    // Times the loop left the send queue empty with work remaining.
    // Structurally zero for the paced pattern; the one-at-a-time
    // pattern used as a test oracle trips it on every message.
    std::uint64_t empty_queue_events = 0;
    std::vector<std::uint32_t> refill_groups;
};

// The throughput posting pattern: fill the send queue to `depth` up
// front (in batch-sized posts), then poll and refill in batch multiples
// so the queue never runs dry. Returns once `total` completions are in.
// Any completion with an error status aborts with a diagnostic.
PaceResult pace_send_queue(SimQueuePair& qp, std::uint64_t total, std::uint32_t depth,
                           std::uint32_t batch, const PaceOptions& options = {});

// Simulated-transport benchmark patterns. Each drives both linked
// endpoints from one thread, stepping the fabric's logical clock, so
// results replay deterministically.
RunReport run_unidirectional(SimFabric& fabric, const SchedulePoint& point,
                             const BenchmarkConfig& config, std::uint32_t run_index);
RunReport run_bidirectional(SimFabric& fabric, const SchedulePoint& point,
                            const BenchmarkConfig& config, std::uint32_t run_index);
RunReport run_onesided_latency(SimFabric& fabric, const SchedulePoint& point,
                               const BenchmarkConfig& config, std::uint32_t run_index);
RunReport run_pingpong(SimFabric& fabric, const SchedulePoint& point,
                       const BenchmarkConfig& config, std::uint32_t run_index);

// Stream-transport patterns, client side. The server drives the same
// point through serve_stream_point. Bi-directional runs use a sender
// and a receiver thread plus a progress watchdog that aborts the
// connection when nothing moves for config.watchdog_timeout_ms.
RunReport run_stream_client(Connection& conn, Mode mode, const SchedulePoint& point,
                            const BenchmarkConfig& config, std::uint32_t run_index);
void serve_stream_point(Connection& conn, Mode mode, const SchedulePoint& point,
                        const BenchmarkConfig& config);

// Dispatch on config.mode/transport; for simulated transports this
// creates a fresh linked pair per run.
RunReport run_point(const SchedulePoint& point, const BenchmarkConfig& config,
                    std::uint32_t run_index);

// Derived per-run metrics and the cross-run digest.
RunMetrics metrics_of(const RunReport& report);
AggregatedPoint aggregate_runs(const std::vector<RunReport>& reports);

}  // namespace wirebench
