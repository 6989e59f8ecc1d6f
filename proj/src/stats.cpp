#include "wirebench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wirebench/errors.hpp"

namespace wirebench {

namespace {

// 1-based nearest rank ceil(p/100 * n), computed so that mathematically
// integral ranks (e.g. p=99.9, n=1000 -> 999) never round up through
// floating-point noise.
std::size_t nearest_rank(double p, std::size_t n) {
    const long double exact = static_cast<long double>(p) * static_cast<long double>(n) / 100.0L;
    const long double guarded = exact - exact * 1e-12L;
    auto rank = static_cast<std::size_t>(std::ceil(guarded));
    return std::clamp<std::size_t>(rank, 1, n);
}

constexpr double ns_to_us(double ns) { return ns / 1000.0; }

}  // namespace

std::uint64_t percentile(const LatencySamples& samples, double p) {
    if (samples.empty())
        throw ConfigError("percentile: empty sample set");
    if (!(p > 0.0) || p > 100.0)
        throw ConfigError("percentile: p must be in (0, 100]");

    std::vector<std::uint64_t> sorted = samples.samples_ns;
    std::sort(sorted.begin(), sorted.end());
    return sorted[nearest_rank(p, sorted.size()) - 1];
}

StatSummary summarize(const LatencySamples& samples) {
    if (samples.empty())
        throw ConfigError("summarize: empty sample set");

    std::vector<std::uint64_t> sorted = samples.samples_ns;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    long double sum = 0.0L;
    for (std::uint64_t s : sorted)
        sum += static_cast<long double>(s);

    StatSummary out;
    out.count = n;
    out.avg_us = ns_to_us(static_cast<double>(sum / static_cast<long double>(n)));
    out.min_us = ns_to_us(static_cast<double>(sorted.front()));
    out.max_us = ns_to_us(static_cast<double>(sorted.back()));
    out.p999_us = ns_to_us(static_cast<double>(sorted[nearest_rank(99.9, n) - 1]));
    out.p9999_us = ns_to_us(static_cast<double>(sorted[nearest_rank(99.99, n) - 1]));
    return out;
}

Throughput throughput(std::uint64_t messages, std::uint64_t payload_size,
                      std::uint64_t elapsed_ns) {
    if (elapsed_ns == 0)
        throw ConfigError("throughput: zero elapsed time");
    const double seconds = static_cast<double>(elapsed_ns) / 1e9;
    Throughput t;
    t.mmps = static_cast<double>(messages) / seconds / 1e6;
    t.mbps = static_cast<double>(messages) * static_cast<double>(payload_size) /
             seconds / 1e6;
    return t;
}

AggregatedPoint aggregate_runs(const std::vector<RunMetrics>& runs) {
    if (runs.empty())
        throw ConfigError("aggregate_runs: no runs");
    for (const RunMetrics& r : runs)
        if (r.payload_size != runs.front().payload_size)
            throw ConfigError("aggregate_runs: mixed payload sizes");

    auto fold = [&](auto&& get) {
        MinAvgMax m;
        m.min = m.max = get(runs.front());
        double sum = 0.0;
        for (const RunMetrics& r : runs) {
            const double v = get(r);
            m.min = std::min(m.min, v);
            m.max = std::max(m.max, v);
            sum += v;
        }
        m.avg = sum / static_cast<double>(runs.size());
        return m;
    };

    AggregatedPoint point;
    point.payload_size = runs.front().payload_size;
    point.mmps = fold([](const RunMetrics& r) { return r.mmps; });
    point.mbps = fold([](const RunMetrics& r) { return r.mbps; });

    const bool all_latency = std::all_of(runs.begin(), runs.end(),
                                         [](const RunMetrics& r) { return r.latency.has_value(); });
    if (all_latency) {
        point.avg_us = fold([](const RunMetrics& r) { return r.latency->avg_us; });
        point.p999_us = fold([](const RunMetrics& r) { return r.latency->p999_us; });
        point.p9999_us = fold([](const RunMetrics& r) { return r.latency->p9999_us; });
    }
    const bool all_overhead = std::all_of(runs.begin(), runs.end(),
                                          [](const RunMetrics& r) { return r.overhead_pct.has_value(); });
    if (all_overhead)
        point.overhead_pct = fold([](const RunMetrics& r) { return *r.overhead_pct; });
    return point;
}

}  // namespace wirebench
