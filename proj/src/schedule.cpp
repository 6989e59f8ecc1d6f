#include "wirebench/schedule.hpp"

#include <algorithm>

#include "wirebench/errors.hpp"
#include "wirebench/sizes.hpp"

namespace wirebench {

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::UNIDIR: return "unidir";
        case Mode::BIDIR: return "bidir";
        case Mode::LATENCY: return "latency";
        case Mode::PINGPONG: return "pingpong";
        case Mode::OVERHEAD: return "overhead";
    }
    return "?";
}

Mode parse_mode(const std::string& text) {
    if (text == "unidir") return Mode::UNIDIR;
    if (text == "bidir") return Mode::BIDIR;
    if (text == "latency") return Mode::LATENCY;
    if (text == "pingpong") return Mode::PINGPONG;
    if (text == "overhead") return Mode::OVERHEAD;
    throw ConfigError("mode: unknown value '" + text +
                      "' (expected unidir|bidir|latency|pingpong|overhead)");
}

TransportKind parse_transport(const std::string& text) {
    if (text == "tcp") return TransportKind::RAW_STREAM;
    if (text == "simverbs-rc-msg") return TransportKind::RC_MSG;
    if (text == "simverbs-rdma-write") return TransportKind::RC_RDMA_WRITE;
    if (text == "simverbs-rdma-read") return TransportKind::RC_RDMA_READ;
    throw ConfigError(
        "transport: unknown value '" + text +
        "' (expected tcp|simverbs-rc-msg|simverbs-rdma-write|simverbs-rdma-read)");
}

Endpoint parse_endpoint(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos)
        throw ConfigError("endpoint: expected host:port, got '" + text + "'");
    Endpoint ep;
    ep.host = text.substr(0, colon);
    const std::string port = text.substr(colon + 1);
    try {
        const unsigned long v = std::stoul(port);
        if (v == 0 || v > 65535)
            throw std::out_of_range(port);
        ep.port = static_cast<std::uint16_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("endpoint: bad port '" + port + "'");
    }
    return ep;
}

static std::uint64_t count_for_size(std::uint64_t base_count, std::uint64_t size,
                                    std::uint64_t halve_from) {
    if (size < halve_from)
        return base_count;
    std::uint64_t halvings = 1;  // halve_from itself already takes half the base
    for (std::uint64_t s = halve_from; s < size; s *= 2)
        ++halvings;
    const std::uint64_t count = halvings >= 64 ? 0 : base_count >> halvings;
    return std::max<std::uint64_t>(1, count);
}

std::vector<SchedulePoint> build_schedule(std::uint64_t base_count,
                                          std::uint64_t min_size,
                                          std::uint64_t max_size,
                                          std::uint64_t halve_from) {
    if (base_count == 0)
        throw ConfigError("base_count: must be >= 1");
    if (!is_power_of_two(min_size))
        throw ConfigError("min_size: not a power of two");
    if (!is_power_of_two(max_size))
        throw ConfigError("max_size: not a power of two");
    if (!is_power_of_two(halve_from))
        throw ConfigError("halve_from: not a power of two");
    if (min_size > max_size)
        throw ConfigError("min_size: exceeds max_size");

    std::vector<SchedulePoint> points;
    for (std::uint64_t size = min_size;; size *= 2) {
        points.push_back({size, count_for_size(base_count, size, halve_from)});
        if (size >= max_size)
            break;
    }
    return points;
}

std::vector<SchedulePoint> build_schedule(const BenchmarkConfig& config) {
    return build_schedule(config.base_count, config.min_size, config.max_size,
                          config.halve_from);
}

BenchmarkConfig validate_config(const BenchmarkConfig& config) {
    std::vector<std::string> problems;
    auto require = [&](bool ok, const char* message) {
        if (!ok)
            problems.emplace_back(message);
    };

    require(is_power_of_two(config.min_size), "min_size not a power of two");
    require(is_power_of_two(config.max_size), "max_size not a power of two");
    require(is_power_of_two(config.halve_from), "halve_from not a power of two");
    require(is_power_of_two(config.mtu), "mtu not a power of two");
    require(config.min_size >= 1, "min_size below 1");
    require(config.min_size <= config.max_size, "min_size exceeds max_size");
    require(config.queue_depth >= 1, "queue_depth below 1");
    require(config.post_batch >= 1, "post_batch below 1");
    require(config.post_batch <= config.queue_depth, "post_batch exceeds queue_depth");
    require(config.runs >= 1, "runs below 1");
    require(config.base_count >= 1, "base_count below 1");

    if (config.mode == Mode::OVERHEAD || config.mode == Mode::PINGPONG)
        require(config.transport == TransportKind::RC_MSG ||
                    config.transport == TransportKind::RAW_STREAM,
                "transport does not support a ping-pong pattern (RDMA echo not modeled)");
    if (config.mode == Mode::OVERHEAD)
        require(config.transport != TransportKind::RAW_STREAM,
                "overhead mode needs the simulated verbs transport (hardware counters)");
    require(config.transport != TransportKind::UD_IPOIB &&
                config.transport != TransportKind::UD_LIBVMA,
            "transport is analytic-only, not runnable");

    if (!problems.empty()) {
        std::string all = "invalid configuration: ";
        for (std::size_t i = 0; i < problems.size(); ++i) {
            if (i)
                all += "; ";
            all += problems[i];
        }
        throw ConfigError(all);
    }

    BenchmarkConfig out = config;
    if (out.is_latency_mode()) {
        // Request-response patterns keep exactly one message in flight.
        out.queue_depth = 1;
        out.post_batch = 1;
    }
    return out;
}

}  // namespace wirebench
