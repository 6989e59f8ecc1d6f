#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace wirebench {

// Raw per-operation durations, nanoseconds.
struct LatencySamples {
    std::vector<std::uint64_t> samples_ns;

    bool empty() const { return samples_ns.empty(); }
    std::size_t count() const { return samples_ns.size(); }
};

struct StatSummary {
    std::uint64_t count = 0;
    double avg_us = 0.0;
    double p999_us = 0.0;
    double p9999_us = 0.0;
    double min_us = 0.0;
    double max_us = 0.0;
};

struct MinAvgMax {
    double min = 0.0;
    double avg = 0.0;
    double max = 0.0;
};

// Per-size digest across repeated runs; latency metrics are absent for
// throughput-only modes, overhead for transports without a wire model.
struct AggregatedPoint {
    std::uint64_t payload_size = 0;
    MinAvgMax mmps;
    MinAvgMax mbps;
    std::optional<MinAvgMax> avg_us;
    std::optional<MinAvgMax> p999_us;
    std::optional<MinAvgMax> p9999_us;
    std::optional<MinAvgMax> overhead_pct;
};

// Nearest-rank percentile: sort ascending, take the 1-based element at
// ceil(p/100 * n). No interpolation. Throws on empty input or p out of
// (0, 100].
std::uint64_t percentile(const LatencySamples& samples, double p);

// Mean plus nearest-rank 99.9/99.99 percentiles, in microseconds.
StatSummary summarize(const LatencySamples& samples);

struct Throughput {
    double mmps = 0.0;  // million messages per second
    double mbps = 0.0;  // decimal megabytes per second
};

// messages / elapsed and messages * payload / elapsed. Throws on
// elapsed == 0.
Throughput throughput(std::uint64_t messages, std::uint64_t payload_size,
                      std::uint64_t elapsed_ns);

struct RunMetrics {
    std::uint64_t payload_size = 0;
    double mmps = 0.0;
    double mbps = 0.0;
    std::optional<StatSummary> latency;
    std::optional<double> overhead_pct;
};

// min / mean / max across runs of the same payload size.
AggregatedPoint aggregate_runs(const std::vector<RunMetrics>& runs);

}  // namespace wirebench
