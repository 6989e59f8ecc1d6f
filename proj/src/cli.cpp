#include "wirebench/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "wirebench/errors.hpp"
#include "wirebench/plot.hpp"
#include "wirebench/schedule.hpp"
#include "wirebench/sizes.hpp"
#include "wirebench/transport.hpp"

namespace wirebench {

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("WIREBENCH_OUT"); env && *env)
        return env;
    return ".";
}

std::string file_prefix(const BenchmarkConfig& config) {
    return std::string("wirebench_") + to_string(config.transport) + "_" +
           to_string(config.mode);
}

CsvRow base_row(const BenchmarkConfig& config, const SchedulePoint& point,
                std::uint32_t run_index) {
    CsvRow row;
    row.transport = to_string(config.transport);
    row.mode = to_string(config.mode);
    row.payload_bytes = point.payload_size;
    row.run = run_index;
    return row;
}

CsvRow row_from_report(const BenchmarkConfig& config, const SchedulePoint& point,
                       const RunReport& report) {
    CsvRow row = base_row(config, point, report.run_index);
    row.messages = report.messages;
    row.elapsed_ns = report.elapsed_ns;
    const RunMetrics m = metrics_of(report);
    row.mmps = m.mmps;
    row.mbps = m.mbps;
    if (m.latency) {
        row.lat_avg_us = m.latency->avg_us;
        row.lat_p999_us = m.latency->p999_us;
        row.lat_p9999_us = m.latency->p9999_us;
    }
    row.wire_bytes = report.wire_bytes;
    row.overhead_pct = m.overhead_pct;
    return row;
}

void flush_csv(const std::vector<CsvRow>& rows, const CliOptions& options) {
    if (options.emit_csv)
        write_csv(rows, csv_path(options));
}

void print_row(const CsvRow& row) {
    if (row.failed()) {
        std::printf("  size=%-8llu run=%u  FAILED: %s\n",
                    static_cast<unsigned long long>(row.payload_bytes), row.run,
                    row.error.c_str());
    } else {
        std::printf("  size=%-8llu run=%u  msgs=%-9llu %8.3f mmps  %10.2f MB/s",
                    static_cast<unsigned long long>(row.payload_bytes), row.run,
                    static_cast<unsigned long long>(row.messages),
                    row.mmps.value_or(0.0), row.mbps.value_or(0.0));
        if (row.lat_avg_us)
            std::printf("  avg=%.3fus p999=%.3fus", *row.lat_avg_us,
                        row.lat_p999_us.value_or(0.0));
        if (row.overhead_pct)
            std::printf("  overhead=%.4g%%", *row.overhead_pct);
        std::printf("\n");
    }
    std::fflush(stdout);
}

ConnectionPtr connect_with_retry(const BenchmarkConfig& config) {
    constexpr int kAttempts = 10;
    for (int attempt = 1;; ++attempt) {
        try {
            return tcp_connect(config.endpoint, config);
        } catch (const TransportError&) {
            if (attempt == kAttempts)
                throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(300));
        }
    }
}

HandshakeInfo point_handshake(const BenchmarkConfig& config, const SchedulePoint& point) {
    HandshakeInfo info;
    info.mode = config.mode;
    info.payload_size = static_cast<std::uint32_t>(point.payload_size);
    info.message_count = point.message_count;
    return info;
}

std::vector<CsvRow> orchestrate_sim(const CliOptions& options, const RunFn& run) {
    const BenchmarkConfig& config = options.config;
    std::vector<CsvRow> rows;
    for (const SchedulePoint& point : build_schedule(config)) {
        std::string point_error;
        for (std::uint32_t run_index = 1; run_index <= config.runs; ++run_index) {
            CsvRow row = base_row(config, point, run_index);
            if (point_error.empty()) {
                try {
                    row = row_from_report(config, point, run(point, config, run_index));
                } catch (const Error& e) {
                    point_error = e.what();
                    row.error = point_error;
                }
            } else {
                row.error = point_error;
            }
            print_row(row);
            rows.push_back(std::move(row));
        }
        flush_csv(rows, options);
    }
    return rows;
}

std::vector<CsvRow> orchestrate_stream_client(const CliOptions& options, const RunFn& run) {
    const BenchmarkConfig& config = options.config;
    ConnectionPtr conn = connect_with_retry(config);
    std::vector<CsvRow> rows;
    for (const SchedulePoint& point : build_schedule(config)) {
        std::string point_error;
        for (std::uint32_t run_index = 1; run_index <= config.runs; ++run_index) {
            CsvRow row = base_row(config, point, run_index);
            if (point_error.empty()) {
                try {
                    conn->negotiate(point_handshake(config, point));
                    RunReport report =
                        run ? run(point, config, run_index)
                            : run_stream_client(*conn, config.mode, point, config, run_index);
                    row = row_from_report(config, point, report);
                } catch (const Error& e) {
                    point_error = e.what();
                    row.error = point_error;
                }
            } else {
                row.error = point_error;
            }
            print_row(row);
            rows.push_back(std::move(row));
        }
        flush_csv(rows, options);
    }
    return rows;
}

void orchestrate_stream_server(const CliOptions& options) {
    const BenchmarkConfig& config = options.config;
    std::printf("listening on %s:%u ...\n", config.endpoint.host.c_str(),
                config.endpoint.port);
    std::fflush(stdout);
    ConnectionPtr conn = tcp_listen(config.endpoint, config);
    for (const SchedulePoint& point : build_schedule(config)) {
        for (std::uint32_t run_index = 1; run_index <= config.runs; ++run_index) {
            conn->negotiate(point_handshake(config, point));
            serve_stream_point(*conn, config.mode, point, config);
        }
        std::printf("  served size=%llu x%u\n",
                    static_cast<unsigned long long>(point.payload_size), config.runs);
        std::fflush(stdout);
    }
}

StatSummary summary_from_row(const CsvRow& row) {
    StatSummary s;
    s.count = row.messages;
    s.avg_us = row.lat_avg_us.value_or(0.0);
    s.p999_us = row.lat_p999_us.value_or(0.0);
    s.p9999_us = row.lat_p9999_us.value_or(0.0);
    s.min_us = s.avg_us;
    s.max_us = s.avg_us;
    return s;
}

std::vector<AggregatedPoint> aggregate_rows(const std::vector<CsvRow>& rows) {
    std::map<std::uint64_t, std::vector<RunMetrics>> by_size;
    for (const CsvRow& row : rows) {
        if (row.failed())
            continue;
        RunMetrics m;
        m.payload_size = row.payload_bytes;
        m.mmps = row.mmps.value_or(0.0);
        m.mbps = row.mbps.value_or(0.0);
        if (row.lat_avg_us)
            m.latency = summary_from_row(row);
        m.overhead_pct = row.overhead_pct;
        by_size[row.payload_bytes].push_back(m);
    }
    std::vector<AggregatedPoint> points;
    for (const auto& [size, metrics] : by_size)
        points.push_back(aggregate_runs(metrics));
    return points;
}

PlotSeries analytic_overhead_series(TransportKind kind, std::uint64_t mtu,
                                    const std::vector<AggregatedPoint>& measured) {
    PlotSeries series;
    series.name = std::string(to_string(kind)) + " (analytic)";
    for (const AggregatedPoint& p : measured) {
        AggregatedPoint a;
        a.payload_size = p.payload_size;
        const double pct = overhead_percent(kind, p.payload_size, mtu);
        a.overhead_pct = MinAvgMax{pct, pct, pct};
        series.points.push_back(a);
    }
    return series;
}

}  // namespace

std::filesystem::path csv_path(const CliOptions& options) {
    return std::filesystem::path(options.config.out_dir) /
           (file_prefix(options.config) + ".csv");
}

std::vector<std::filesystem::path> emit_plots(const std::vector<CsvRow>& rows,
                                              const CliOptions& options) {
    // Round-trip through the persisted schema so plots never depend on
    // anything the CSV would not carry.
    const std::vector<CsvRow> parsed = parse_csv(to_csv(rows));
    const std::vector<AggregatedPoint> points = aggregate_rows(parsed);
    if (points.empty())
        return {};

    const BenchmarkConfig& config = options.config;
    const std::filesystem::path dir(config.out_dir);
    const std::string prefix = file_prefix(config);
    const std::string series_name =
        std::string(to_string(config.transport)) + " " + to_string(config.mode);
    std::vector<std::filesystem::path> written;

    auto write = [&](const PlotSpec& spec, const std::string& suffix) {
        const auto path = dir / (prefix + "_" + suffix + ".svg");
        render_plot(spec, path);
        written.push_back(path);
    };

    switch (config.mode) {
        case Mode::UNIDIR:
        case Mode::BIDIR: {
            PlotSpec spec;
            spec.kind = PlotKind::THROUGHPUT;
            spec.title = series_name + " throughput";
            spec.series.push_back({series_name, points});
            write(spec, "throughput");
            break;
        }
        case Mode::LATENCY:
        case Mode::PINGPONG: {
            const std::pair<LatencyMetric, const char*> variants[] = {
                {LatencyMetric::AVG, "latency_avg"},
                {LatencyMetric::P999, "latency_p999"},
                {LatencyMetric::P9999, "latency_p9999"},
            };
            for (const auto& [metric, suffix] : variants) {
                PlotSpec spec;
                spec.kind = PlotKind::LATENCY;
                spec.latency_metric = metric;
                spec.title = series_name + " " + suffix;
                spec.series.push_back({series_name, points});
                write(spec, suffix);
            }
            break;
        }
        case Mode::OVERHEAD: {
            PlotSpec spec;
            spec.kind = PlotKind::OVERHEAD;
            spec.title = "per-message overhead";
            spec.series.push_back({series_name + " (measured)", points});
            for (TransportKind kind :
                 {TransportKind::RC_MSG, TransportKind::RC_RDMA_WRITE,
                  TransportKind::UD_IPOIB, TransportKind::UD_LIBVMA})
                spec.series.push_back(
                    analytic_overhead_series(kind, config.mtu, points));
            write(spec, "overhead");
            break;
        }
    }
    return written;
}

CliOptions parse_args(const std::vector<std::string>& args) {
    CLI::App app{"wirebench - point-to-point network microbenchmark"};
    app.name("wirebench");

    std::string mode_text = "unidir";
    std::string transport_text = "simverbs-rc-msg";
    std::string sizes_text = "1:1M";
    std::string halve_text = "8K";
    std::string mtu_text = "4096";
    std::string listen_text, connect_text, out_text;
    std::uint64_t count = 0;
    CliOptions options;
    BenchmarkConfig& config = options.config;

    app.add_option("--mode", mode_text,
                   "benchmark type: unidir|bidir|latency|pingpong|overhead");
    app.add_option("--transport", transport_text,
                   "tcp|simverbs-rc-msg|simverbs-rdma-write|simverbs-rdma-read");
    app.add_option("--listen", listen_text, "serve one client on host:port (tcp)");
    app.add_option("--connect", connect_text, "connect to a server at host:port (tcp)");
    app.add_option("--sizes", sizes_text, "payload sweep MIN:MAX, powers of two");
    app.add_option("--count", count, "messages at the smallest size");
    app.add_option("--halve-from", halve_text, "size at which counts start halving");
    app.add_option("--queue-depth", config.queue_depth, "outstanding work requests");
    app.add_option("--batch", config.post_batch, "work requests per post call");
    app.add_option("--runs", config.runs, "repetitions per size");
    app.add_option("--mtu", mtu_text, "simulated MTU bytes");
    app.add_option("--warmup", config.warmup_count, "messages excluded from stats");
    app.add_option("--out", out_text, "output directory (default $WIREBENCH_OUT or .)");
    app.add_flag("--csv", options.emit_csv, "write results CSV");
    app.add_flag("--plot", options.emit_plots, "write SVG plots");
    app.add_option("--sim-latency-ns", config.sim_latency_ns,
                   "injected one-way service time for simulated runs");
    app.add_flag("--verify", config.verify_payload, "byte-compare ping-pong echoes");

    try {
        // CLI11 wants argv order reversed.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    config.mode = parse_mode(mode_text);
    config.transport = parse_transport(transport_text);
    std::tie(config.min_size, config.max_size) = parse_size_range(sizes_text);
    config.halve_from = parse_size(halve_text);
    config.mtu = parse_size(mtu_text);
    config.base_count = count != 0 ? count
                        : config.is_latency_mode() ? 100'000ULL
                                                   : 1'000'000ULL;
    config.out_dir = !out_text.empty() ? out_text : default_out_dir();

    if (!listen_text.empty() && !connect_text.empty())
        throw ConfigError("--listen and --connect are mutually exclusive");
    if (config.transport == TransportKind::RAW_STREAM) {
        if (listen_text.empty() && connect_text.empty())
            throw ConfigError("tcp transport needs --listen or --connect");
        config.role = listen_text.empty() ? Role::CLIENT : Role::SERVER;
        config.endpoint =
            parse_endpoint(listen_text.empty() ? connect_text : listen_text);
    } else if (!listen_text.empty() || !connect_text.empty()) {
        throw ConfigError("--listen/--connect apply to the tcp transport only");
    }

    options.config = validate_config(config);
    return options;
}

std::vector<CsvRow> orchestrate(const CliOptions& options, const RunFn& run_override) {
    const BenchmarkConfig& config = options.config;
    std::vector<CsvRow> rows;
    if (config.is_sim()) {
        const RunFn run = run_override
                              ? run_override
                              : RunFn([](const SchedulePoint& point,
                                         const BenchmarkConfig& cfg, std::uint32_t idx) {
                                    return run_point(point, cfg, idx);
                                });
        rows = orchestrate_sim(options, run);
    } else if (config.role == Role::CLIENT) {
        rows = orchestrate_stream_client(options, run_override);
    } else {
        orchestrate_stream_server(options);
        return {};
    }

    flush_csv(rows, options);
    if (options.emit_plots)
        emit_plots(rows, options);
    return rows;
}

int run_cli(int argc, const char* const* argv) {
    CliOptions options;
    try {
        options = parse_args(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const HelpRequested& help) {
        std::cout << help.text;
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        orchestrate(options);
        return 0;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace wirebench
