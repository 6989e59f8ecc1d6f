#include "wirebench/engine.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <thread>

#include "wirebench/errors.hpp"
#include "wirebench/overhead.hpp"

namespace wirebench {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t ns_between(Clock::time_point a, Clock::time_point b) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
}

const char* status_name(CompletionStatus s) {
    switch (s) {
        case CompletionStatus::OK: return "OK";
        case CompletionStatus::RNR_RETRY_EXCEEDED: return "RNR_RETRY_EXCEEDED";
        case CompletionStatus::ERROR: return "ERROR";
    }
    return "?";
}

// Receive-side work request ids live in their own range so completions
// can be told apart when both land in the same queue.
constexpr std::uint64_t kRecvIdBase = 1ULL << 48;

constexpr std::byte kDoneByte{0xD7};
constexpr std::byte kAckByte{0xA5};

std::vector<std::byte> make_pattern(std::size_t n, std::uint64_t seed) {
    std::vector<std::byte> buf(n);
    std::uint64_t x = seed * 0x9e3779b97f4a7c15ULL + 1;
    for (std::size_t i = 0; i < n; ++i) {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        buf[i] = static_cast<std::byte>(x & 0xff);
    }
    return buf;
}

std::uint64_t effective_warmup(const BenchmarkConfig& config, std::uint64_t count) {
    // At least one timed message survives.
    return std::min(config.warmup_count, count > 0 ? count - 1 : 0);
}

WorkOp send_op_for(TransportKind kind) {
    switch (kind) {
        case TransportKind::RC_MSG: return WorkOp::SEND;
        case TransportKind::RC_RDMA_WRITE: return WorkOp::RDMA_WRITE;
        case TransportKind::RC_RDMA_READ: return WorkOp::RDMA_READ;
        default:
            throw ConfigError("transport kind is not runnable on the simulated fabric");
    }
}

// The paced send loop as a resumable state machine, so two endpoints
// can be driven from one deterministic event loop.
class Pacer {
  public:
    Pacer(SimQueuePair& qp, std::uint64_t total, std::uint32_t depth, std::uint32_t batch,
          const PaceOptions& options)
        : qp_(qp),
          total_(total),
          depth_(depth),
          batch_(batch),
          options_(options),
          wc_(std::min<std::uint64_t>(std::max<std::uint32_t>(depth, 1), 256)) {
        if (batch_ == 0 || batch_ > depth_)
            throw ConfigError("pace_send_queue: batch must be in [1, queue_depth]");
        first_post_ns_ = qp_.fabric().now();
        last_completion_ns_ = first_post_ns_;
        refill();
        checkpoint();
    }

    bool finished() const { return collected_ == total_; }

    bool step() {
        bool progressed = false;
        if (!finished()) {
            const std::size_t n = qp_.poll_cq(std::span(wc_.data(), wc_.size()));
            if (n > 0) {
                progressed = true;
                last_completion_ns_ = qp_.fabric().now();
                for (std::size_t i = 0; i < n; ++i) {
                    if (wc_[i].status != CompletionStatus::OK)
                        throw EngineError("send work request " +
                                          std::to_string(wc_[i].request_id) +
                                          " failed: " + status_name(wc_[i].status));
                    ++collected_;
                    --in_flight_;
                }
                refill();
            }
        }
        checkpoint();
        return progressed;
    }

    PaceResult result() const {
        PaceResult r;
        r.elapsed_ns = last_completion_ns_ - first_post_ns_;
        r.completions = collected_;
        r.max_occupancy = max_occupancy_;
        r.empty_queue_events = empty_queue_events_;
        r.refill_groups = refill_groups_;
        return r;
    }

    std::uint64_t first_post_ns() const { return first_post_ns_; }
    std::uint64_t last_completion_ns() const { return last_completion_ns_; }

  private:
    void refill() {
        while (posted_ < total_) {
            const auto k = static_cast<std::uint32_t>(
                std::min<std::uint64_t>(batch_, total_ - posted_));
            if (depth_ - in_flight_ < k)
                break;
            for (std::uint32_t j = 0; j < k; ++j) {
                WorkRequest wr;
                wr.id = posted_ + 1;
                wr.op = options_.op;
                wr.payload_size = options_.payload_size;
                wr.buffer = options_.send_buffer;
                if (!qp_.post_send(wr))
                    throw EngineError("post_send rejected below the tracked depth");
                ++posted_;
                ++in_flight_;
            }
            max_occupancy_ = std::max(max_occupancy_, in_flight_);
            if (options_.record_refill_groups)
                refill_groups_.push_back(k);
        }
    }

    // The queue must never sit empty while messages remain: the refill
    // above runs before control returns to the poll loop.
    void checkpoint() {
        if (in_flight_ == 0 && collected_ < total_)
            ++empty_queue_events_;
    }

    SimQueuePair& qp_;
    std::uint64_t total_;
    std::uint32_t depth_;
    std::uint32_t batch_;
    PaceOptions options_;
    std::vector<WorkCompletion> wc_;
    std::uint64_t posted_ = 0;
    std::uint64_t collected_ = 0;
    std::uint32_t in_flight_ = 0;
    std::uint32_t max_occupancy_ = 0;
    std::uint64_t empty_queue_events_ = 0;
    std::uint64_t first_post_ns_ = 0;
    std::uint64_t last_completion_ns_ = 0;
    std::vector<std::uint32_t> refill_groups_;
};

// Keeps a receive queue stocked and drains its completion queue.
class RecvPump {
  public:
    RecvPump(SimQueuePair& qp, std::uint64_t expected, std::uint32_t payload_size,
             std::span<std::byte> buffer)
        : qp_(qp), to_post_(expected), expected_(expected), payload_size_(payload_size),
          buffer_(buffer) {}

    bool step() {
        bool progressed = false;
        while (to_post_ > 0) {
            WorkRequest wr;
            wr.id = kRecvIdBase + next_id_++;
            wr.op = WorkOp::RECV;
            wr.payload_size = payload_size_;
            wr.buffer = buffer_;
            if (!qp_.post_recv(wr))
                break;
            --to_post_;
            progressed = true;
        }
        for (;;) {
            const std::size_t n = qp_.poll_cq(std::span(wc_.data(), wc_.size()));
            if (n == 0)
                break;
            progressed = true;
            for (std::size_t i = 0; i < n; ++i) {
                if (wc_[i].status != CompletionStatus::OK)
                    throw EngineError("receive completion failed: " +
                                      std::string(status_name(wc_[i].status)));
                ++received_;
            }
            if (n < wc_.size())
                break;
        }
        return progressed;
    }

    bool finished() const { return received_ == expected_; }
    std::uint64_t received() const { return received_; }

  private:
    SimQueuePair& qp_;
    std::uint64_t to_post_;
    std::uint64_t expected_;
    std::uint32_t payload_size_;
    std::span<std::byte> buffer_;
    std::uint64_t next_id_ = 0;
    std::uint64_t received_ = 0;
    std::array<WorkCompletion, 64> wc_{};
};

std::uint64_t summed_xmit(SimFabric& f) {
    return f.end_a().counters().port_xmit_data + f.end_b().counters().port_xmit_data;
}

std::uint64_t summed_rnr(SimFabric& f) {
    return f.end_a().counters().rnr_nak_retry_err + f.end_b().counters().rnr_nak_retry_err;
}

}  // namespace

PaceResult pace_send_queue(SimQueuePair& qp, std::uint64_t total, std::uint32_t depth,
                           std::uint32_t batch, const PaceOptions& options) {
    Pacer pacer(qp, total, depth, batch, options);
    SimFabric& fabric = qp.fabric();
    while (!pacer.finished()) {
        if (options.service_peer)
            options.service_peer();
        if (!pacer.step() && !fabric.advance_to_next_event())
            throw EngineError("simulation stalled after " +
                              std::to_string(pacer.result().completions) + " of " +
                              std::to_string(total) + " completions");
    }
    return pacer.result();
}

RunReport run_unidirectional(SimFabric& fabric, const SchedulePoint& point,
                             const BenchmarkConfig& config, std::uint32_t run_index) {
    const auto payload = static_cast<std::uint32_t>(point.payload_size);
    const WorkOp op = send_op_for(config.transport);
    const bool messaging = op == WorkOp::SEND;
    const std::uint64_t total = point.message_count;
    const std::uint64_t warmup = effective_warmup(config, total);
    const std::uint64_t timed = total - warmup;

    std::vector<std::byte> send_buf = make_pattern(payload, run_index);
    std::vector<std::byte> recv_buf(payload);

    SimQueuePair& sender = fabric.end_a();
    SimQueuePair& receiver = fabric.end_b();
    RecvPump pump(receiver, messaging ? total : 0, payload, recv_buf);

    PaceOptions opt;
    opt.op = op;
    opt.payload_size = payload;
    opt.send_buffer = send_buf;
    opt.service_peer = [&pump] { pump.step(); };

    if (warmup > 0)
        pace_send_queue(sender, warmup, config.queue_depth, config.post_batch, opt);

    const std::uint64_t xmit0 = summed_xmit(fabric);
    const std::uint64_t rnr0 = summed_rnr(fabric);
    const PaceResult paced =
        pace_send_queue(sender, timed, config.queue_depth, config.post_batch, opt);

    while (!pump.finished()) {
        if (!pump.step() && !fabric.advance_to_next_event())
            throw EngineError("receiver saw " + std::to_string(pump.received()) + " of " +
                              std::to_string(total) + " messages");
    }

    RunReport report;
    report.payload_size = point.payload_size;
    report.run_index = run_index;
    report.messages = timed;
    report.elapsed_ns = std::max<std::uint64_t>(paced.elapsed_ns, 1);
    report.wire_bytes = summed_xmit(fabric) - xmit0;
    report.rnr_naks = summed_rnr(fabric) - rnr0;
    return report;
}

RunReport run_bidirectional(SimFabric& fabric, const SchedulePoint& point,
                            const BenchmarkConfig& config, std::uint32_t run_index) {
    const auto payload = static_cast<std::uint32_t>(point.payload_size);
    const WorkOp op = send_op_for(config.transport);
    const bool messaging = op == WorkOp::SEND;
    const std::uint64_t total = point.message_count;
    const std::uint64_t warmup = effective_warmup(config, total);
    const std::uint64_t timed = total - warmup;

    std::vector<std::byte> send_a = make_pattern(payload, run_index);
    std::vector<std::byte> send_b = make_pattern(payload, run_index + 101);
    std::vector<std::byte> recv_a(payload), recv_b(payload);

    RecvPump pump_a(fabric.end_a(), messaging ? total : 0, payload, recv_a);
    RecvPump pump_b(fabric.end_b(), messaging ? total : 0, payload, recv_b);

    PaceOptions opt_a, opt_b;
    opt_a.op = opt_b.op = op;
    opt_a.payload_size = opt_b.payload_size = payload;
    opt_a.send_buffer = send_a;
    opt_b.send_buffer = send_b;

    auto run_phase = [&](std::uint64_t n, std::uint64_t& elapsed_a, std::uint64_t& elapsed_b) {
        Pacer pacer_a(fabric.end_a(), n, config.queue_depth, config.post_batch, opt_a);
        Pacer pacer_b(fabric.end_b(), n, config.queue_depth, config.post_batch, opt_b);
        while (!pacer_a.finished() || !pacer_b.finished()) {
            bool progressed = pump_a.step();
            progressed |= pump_b.step();
            progressed |= pacer_a.step();
            progressed |= pacer_b.step();
            if (!progressed && !fabric.advance_to_next_event())
                throw EngineError("bidirectional simulation stalled");
        }
        elapsed_a = pacer_a.last_completion_ns() - pacer_a.first_post_ns();
        elapsed_b = pacer_b.last_completion_ns() - pacer_b.first_post_ns();
    };

    std::uint64_t elapsed_a = 0, elapsed_b = 0;
    if (warmup > 0)
        run_phase(warmup, elapsed_a, elapsed_b);

    const std::uint64_t xmit0 = summed_xmit(fabric);
    const std::uint64_t rnr0 = summed_rnr(fabric);
    run_phase(timed, elapsed_a, elapsed_b);

    while (!pump_a.finished() || !pump_b.finished()) {
        bool progressed = pump_a.step();
        progressed |= pump_b.step();
        if (!progressed && !fabric.advance_to_next_event())
            throw EngineError("bidirectional receivers starved");
    }

    RunReport report;
    report.payload_size = point.payload_size;
    report.run_index = run_index;
    report.messages = 2 * timed;
    report.elapsed_ns = std::max<std::uint64_t>(std::max(elapsed_a, elapsed_b), 1);
    report.wire_bytes = summed_xmit(fabric) - xmit0;
    report.rnr_naks = summed_rnr(fabric) - rnr0;
    return report;
}

RunReport run_onesided_latency(SimFabric& fabric, const SchedulePoint& point,
                               const BenchmarkConfig& config, std::uint32_t run_index) {
    const auto payload = static_cast<std::uint32_t>(point.payload_size);
    const WorkOp op = send_op_for(config.transport);
    const bool messaging = op == WorkOp::SEND;
    const std::uint64_t total = point.message_count;
    const std::uint64_t warmup = effective_warmup(config, total);

    std::vector<std::byte> send_buf = make_pattern(payload, run_index);
    std::vector<std::byte> recv_buf(payload);

    SimQueuePair& sender = fabric.end_a();
    RecvPump pump(fabric.end_b(), messaging ? total : 0, payload, recv_buf);

    LatencySamples samples;
    samples.samples_ns.reserve(total - warmup);
    std::array<WorkCompletion, 8> wc{};

    std::uint64_t xmit0 = 0, rnr0 = 0, t_start = 0, t_end = 0;
    for (std::uint64_t i = 0; i < total; ++i) {
        pump.step();
        if (i == warmup) {
            xmit0 = summed_xmit(fabric);
            rnr0 = summed_rnr(fabric);
            t_start = fabric.now();
        }
        const std::uint64_t t0 = fabric.now();
        WorkRequest wr{i + 1, op, payload, send_buf};
        if (!sender.post_send(wr))
            throw EngineError("latency run: send queue full at depth 1");
        for (bool done = false; !done;) {
            const std::size_t n = sender.poll_cq(std::span(wc.data(), wc.size()));
            for (std::size_t k = 0; k < n; ++k) {
                if (wc[k].status != CompletionStatus::OK)
                    throw EngineError("latency run: completion failed: " +
                                      std::string(status_name(wc[k].status)));
                done = true;
            }
            if (!done && !fabric.advance_to_next_event())
                throw EngineError("latency run stalled at message " + std::to_string(i));
        }
        const std::uint64_t t1 = fabric.now();
        if (i >= warmup)
            samples.samples_ns.push_back(t1 - t0);
        t_end = t1;
    }

    while (!pump.finished()) {
        if (!pump.step() && !fabric.advance_to_next_event())
            throw EngineError("latency receiver starved");
    }

    RunReport report;
    report.payload_size = point.payload_size;
    report.run_index = run_index;
    report.messages = total - warmup;
    report.elapsed_ns = std::max<std::uint64_t>(t_end - t_start, 1);
    report.latency_samples = std::move(samples);
    report.wire_bytes = summed_xmit(fabric) - xmit0;
    report.rnr_naks = summed_rnr(fabric) - rnr0;
    return report;
}

RunReport run_pingpong(SimFabric& fabric, const SchedulePoint& point,
                       const BenchmarkConfig& config, std::uint32_t run_index) {
    if (config.transport != TransportKind::RC_MSG)
        throw ConfigError("ping-pong needs the messaging transport");
    const auto payload = static_cast<std::uint32_t>(point.payload_size);
    const std::uint64_t total = point.message_count;
    const std::uint64_t warmup = effective_warmup(config, total);

    SimQueuePair& client = fabric.end_a();
    SimQueuePair& server = fabric.end_b();

    std::vector<std::byte> ping = make_pattern(payload, run_index);
    std::vector<std::byte> pong_echo(payload);  // server receives then echoes this
    std::vector<std::byte> pong_back(payload);  // client's view of the echo

    LatencySamples samples;
    samples.samples_ns.reserve(total - warmup);
    std::array<WorkCompletion, 8> wc{};

    std::uint64_t client_recvs = 0, server_recvs = 0;
    std::uint64_t client_sends = 0, server_sends = 0;
    auto drain = [&](SimQueuePair& qp, std::uint64_t& sends, std::uint64_t& recvs) {
        for (;;) {
            const std::size_t n = qp.poll_cq(std::span(wc.data(), wc.size()));
            if (n == 0)
                return;
            for (std::size_t k = 0; k < n; ++k) {
                if (wc[k].status != CompletionStatus::OK)
                    throw EngineError("ping-pong completion failed: " +
                                      std::string(status_name(wc[k].status)));
                if (wc[k].request_id >= kRecvIdBase) {
                    if (wc[k].bytes != payload)
                        throw EngineError("echo size mismatch: got " +
                                          std::to_string(wc[k].bytes) + ", expected " +
                                          std::to_string(payload));
                    ++recvs;
                } else {
                    ++sends;
                }
            }
        }
    };

    std::uint64_t xmit0 = 0, rnr0 = 0, t_start = 0, t_end = 0;
    for (std::uint64_t i = 0; i < total; ++i) {
        WorkRequest crecv{kRecvIdBase + i, WorkOp::RECV, payload, pong_back};
        WorkRequest srecv{kRecvIdBase + i, WorkOp::RECV, payload, pong_echo};
        if (!client.post_recv(crecv) || !server.post_recv(srecv))
            throw EngineError("ping-pong: receive queue full at depth 1");
        if (i == warmup) {
            xmit0 = summed_xmit(fabric);
            rnr0 = summed_rnr(fabric);
            t_start = fabric.now();
        }

        const std::uint64_t t0 = fabric.now();
        if (!client.post_send({i + 1, WorkOp::SEND, payload, ping}))
            throw EngineError("ping-pong: client send queue full");
        while (server_recvs <= i) {
            drain(server, server_sends, server_recvs);
            drain(client, client_sends, client_recvs);
            if (server_recvs <= i && !fabric.advance_to_next_event())
                throw EngineError("ping-pong stalled waiting for the ping");
        }
        if (!server.post_send({i + 1, WorkOp::SEND, payload, pong_echo}))
            throw EngineError("ping-pong: server send queue full");
        while (client_recvs <= i) {
            drain(client, client_sends, client_recvs);
            drain(server, server_sends, server_recvs);
            if (client_recvs <= i && !fabric.advance_to_next_event())
                throw EngineError("ping-pong stalled waiting for the pong");
        }
        const std::uint64_t t1 = fabric.now();
        if (config.verify_payload && payload > 0 &&
            std::memcmp(pong_back.data(), ping.data(), payload) != 0)
            throw EngineError("echo mismatch at iteration " + std::to_string(i));
        if (i >= warmup)
            samples.samples_ns.push_back(t1 - t0);
        t_end = t1;
    }

    while (client_sends < total || server_sends < total) {
        drain(client, client_sends, client_recvs);
        drain(server, server_sends, server_recvs);
        if ((client_sends < total || server_sends < total) && !fabric.advance_to_next_event())
            throw EngineError("ping-pong: missing send completions");
    }

    RunReport report;
    report.payload_size = point.payload_size;
    report.run_index = run_index;
    report.messages = 2 * (total - warmup);  // pings and pongs on the wire
    report.elapsed_ns = std::max<std::uint64_t>(t_end - t_start, 1);
    report.latency_samples = std::move(samples);
    report.wire_bytes = summed_xmit(fabric) - xmit0;
    report.rnr_naks = summed_rnr(fabric) - rnr0;
    return report;
}

namespace {

// Aborts the connection when neither thread reports progress within the
// timeout, unblocking whatever syscall the run is stuck in.
class ProgressWatchdog {
  public:
    ProgressWatchdog(Connection& conn, std::uint64_t timeout_ms)
        : conn_(conn), timeout_ms_(timeout_ms), thread_([this] { watch(); }) {}

    ~ProgressWatchdog() { stop(); }

    void stop() {
        {
            std::lock_guard lock(mutex_);
            done_ = true;
        }
        cv_.notify_all();
        if (thread_.joinable())
            thread_.join();
    }

    void bump() { progress_.fetch_add(1, std::memory_order_relaxed); }
    bool fired() const { return fired_.load(); }

  private:
    void watch() {
        std::unique_lock lock(mutex_);
        std::uint64_t last_seen = progress_.load();
        auto last_change = Clock::now();
        while (!done_) {
            cv_.wait_for(lock, std::chrono::milliseconds(50));
            if (done_)
                return;
            const std::uint64_t cur = progress_.load();
            if (cur != last_seen) {
                last_seen = cur;
                last_change = Clock::now();
            } else if (ns_between(last_change, Clock::now()) >= timeout_ms_ * 1'000'000ULL) {
                fired_.store(true);
                conn_.abort_hard();
                return;
            }
        }
    }

    Connection& conn_;
    std::uint64_t timeout_ms_;
    std::atomic<std::uint64_t> progress_{0};
    std::atomic<bool> fired_{false};
    bool done_ = false;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::thread thread_;
};

void stream_send_messages(Connection& conn, std::span<const std::byte> buf,
                          std::uint64_t n, ProgressWatchdog* dog) {
    for (std::uint64_t i = 0; i < n; ++i) {
        conn.send_blocking(buf);
        if (dog)
            dog->bump();
    }
}

void stream_recv_messages(Connection& conn, std::span<std::byte> buf, std::uint64_t n,
                          ProgressWatchdog* dog) {
    for (std::uint64_t i = 0; i < n; ++i) {
        conn.recv_blocking(buf);
        if (dog)
            dog->bump();
    }
}

void send_byte(Connection& conn, std::byte b) { conn.send_blocking({&b, 1}); }

std::byte recv_byte(Connection& conn) {
    std::byte b{};
    conn.recv_blocking({&b, 1});
    return b;
}

void expect_byte(Connection& conn, std::byte want, const char* what) {
    const std::byte got = recv_byte(conn);
    if (got != want)
        throw EngineError(std::string("protocol: unexpected ") + what + " byte");
}

void send_u64(Connection& conn, std::uint64_t v) {
    std::array<std::byte, 8> b;
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
    conn.send_blocking(b);
}

std::uint64_t recv_u64(Connection& conn) {
    std::array<std::byte, 8> b{};
    conn.recv_blocking(b);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(b[i])) << (8 * i);
    return v;
}

RunReport stream_unidir_client(Connection& conn, const SchedulePoint& point,
                               const BenchmarkConfig& config, std::uint32_t run_index) {
    const std::uint64_t total = point.message_count;
    const std::uint64_t warmup = effective_warmup(config, total);
    std::vector<std::byte> buf = make_pattern(point.payload_size, run_index);

    stream_send_messages(conn, buf, warmup, nullptr);
    const auto t0 = Clock::now();
    stream_send_messages(conn, buf, total - warmup, nullptr);
    // The 1-byte completion token folds the remote drain into the
    // elapsed time; a bare send return would under-count buffering.
    expect_byte(conn, kAckByte, "completion token");
    const auto t1 = Clock::now();

    RunReport report;
    report.payload_size = point.payload_size;
    report.run_index = run_index;
    report.messages = total - warmup;
    report.elapsed_ns = std::max<std::uint64_t>(ns_between(t0, t1), 1);
    return report;
}

void stream_unidir_server(Connection& conn, const SchedulePoint& point) {
    std::vector<std::byte> buf(point.payload_size);
    stream_recv_messages(conn, buf, point.message_count, nullptr);
    send_byte(conn, kAckByte);
}

// Both peers run the same symmetric script: a sender and a receiver
// thread, then a single-threaded ack + elapsed exchange.
RunReport stream_bidir_peer(Connection& conn, const SchedulePoint& point,
                            const BenchmarkConfig& config, std::uint32_t run_index) {
    const std::uint64_t total = point.message_count;
    const std::uint64_t warmup = effective_warmup(config, total);
    std::vector<std::byte> send_buf = make_pattern(point.payload_size, run_index);
    std::vector<std::byte> recv_buf(point.payload_size);

    ProgressWatchdog dog(conn, config.watchdog_timeout_ms);
    Clock::time_point t0{};
    std::exception_ptr send_error, recv_error;

    std::thread sender([&] {
        try {
            stream_send_messages(conn, send_buf, warmup, &dog);
            t0 = Clock::now();
            stream_send_messages(conn, send_buf, total - warmup, &dog);
            send_byte(conn, kDoneByte);
        } catch (...) {
            send_error = std::current_exception();
        }
    });
    std::thread receiver([&] {
        try {
            stream_recv_messages(conn, recv_buf, total, &dog);
            expect_byte(conn, kDoneByte, "stream-done");
        } catch (...) {
            recv_error = std::current_exception();
        }
    });
    sender.join();
    receiver.join();

    auto watchdog_diagnostic = [&] {
        return EngineError("watchdog: no progress for " +
                           std::to_string(config.watchdog_timeout_ms) + " ms at size " +
                           std::to_string(point.payload_size));
    };
    if (dog.fired())
        throw watchdog_diagnostic();
    if (send_error)
        std::rethrow_exception(send_error);
    if (recv_error)
        std::rethrow_exception(recv_error);

    std::uint64_t my_elapsed = 0, peer_elapsed = 0;
    try {
        // Peer ack confirms our stream fully drained on its side.
        send_byte(conn, kAckByte);
        expect_byte(conn, kAckByte, "drain ack");
        const auto t1 = Clock::now();
        my_elapsed = std::max<std::uint64_t>(ns_between(t0, t1), 1);
        send_u64(conn, my_elapsed);
        peer_elapsed = recv_u64(conn);
    } catch (...) {
        if (dog.fired())
            throw watchdog_diagnostic();
        throw;
    }
    dog.stop();

    RunReport report;
    report.payload_size = point.payload_size;
    report.run_index = run_index;
    report.messages = 2 * (total - warmup);
    report.elapsed_ns = std::max(my_elapsed, peer_elapsed);
    return report;
}

RunReport stream_latency_client(Connection& conn, const SchedulePoint& point,
                                const BenchmarkConfig& config, std::uint32_t run_index) {
    const std::uint64_t total = point.message_count;
    const std::uint64_t warmup = effective_warmup(config, total);
    std::vector<std::byte> buf = make_pattern(point.payload_size, run_index);

    LatencySamples samples;
    samples.samples_ns.reserve(total - warmup);

    stream_send_messages(conn, buf, warmup, nullptr);
    const auto t_start = Clock::now();
    for (std::uint64_t i = warmup; i < total; ++i) {
        const auto t0 = Clock::now();
        conn.send_blocking(buf);
        const auto t1 = Clock::now();
        // A stream send can return before delivery; the sample is a
        // lower bound on the true one-way time.
        samples.samples_ns.push_back(ns_between(t0, t1));
    }
    const auto t_end = Clock::now();
    expect_byte(conn, kAckByte, "completion token");

    RunReport report;
    report.payload_size = point.payload_size;
    report.run_index = run_index;
    report.messages = total - warmup;
    report.elapsed_ns = std::max<std::uint64_t>(ns_between(t_start, t_end), 1);
    report.latency_samples = std::move(samples);
    return report;
}

RunReport stream_pingpong_client(Connection& conn, const SchedulePoint& point,
                                 const BenchmarkConfig& config, std::uint32_t run_index) {
    const std::uint64_t total = point.message_count;
    const std::uint64_t warmup = effective_warmup(config, total);
    std::vector<std::byte> ping = make_pattern(point.payload_size, run_index);
    std::vector<std::byte> pong(point.payload_size);

    LatencySamples samples;
    samples.samples_ns.reserve(total - warmup);

    Clock::time_point t_start{};
    for (std::uint64_t i = 0; i < total; ++i) {
        if (i == warmup)
            t_start = Clock::now();
        const auto t0 = Clock::now();
        conn.send_blocking(ping);
        conn.recv_blocking(pong);
        const auto t1 = Clock::now();
        if (config.verify_payload && point.payload_size > 0 &&
            std::memcmp(pong.data(), ping.data(), point.payload_size) != 0)
            throw EngineError("echo mismatch at iteration " + std::to_string(i));
        if (i >= warmup)
            samples.samples_ns.push_back(ns_between(t0, t1));
    }
    const auto t_end = Clock::now();

    RunReport report;
    report.payload_size = point.payload_size;
    report.run_index = run_index;
    report.messages = 2 * (total - warmup);
    report.elapsed_ns = std::max<std::uint64_t>(ns_between(t_start, t_end), 1);
    report.latency_samples = std::move(samples);
    return report;
}

void stream_pingpong_server(Connection& conn, const SchedulePoint& point) {
    std::vector<std::byte> buf(point.payload_size);
    for (std::uint64_t i = 0; i < point.message_count; ++i) {
        conn.recv_blocking(buf);
        conn.send_blocking(buf);  // echo the exact bytes back
    }
}

}  // namespace

RunReport run_stream_client(Connection& conn, Mode mode, const SchedulePoint& point,
                            const BenchmarkConfig& config, std::uint32_t run_index) {
    switch (mode) {
        case Mode::UNIDIR:
            return stream_unidir_client(conn, point, config, run_index);
        case Mode::BIDIR:
            return stream_bidir_peer(conn, point, config, run_index);
        case Mode::LATENCY:
            return stream_latency_client(conn, point, config, run_index);
        case Mode::PINGPONG:
            return stream_pingpong_client(conn, point, config, run_index);
        case Mode::OVERHEAD:
            break;
    }
    throw ConfigError("overhead mode is not runnable over a stream transport");
}

void serve_stream_point(Connection& conn, Mode mode, const SchedulePoint& point,
                        const BenchmarkConfig& config) {
    switch (mode) {
        case Mode::UNIDIR:
        case Mode::LATENCY:
            stream_unidir_server(conn, point);
            return;
        case Mode::BIDIR:
            stream_bidir_peer(conn, point, config, 1);
            return;
        case Mode::PINGPONG:
            stream_pingpong_server(conn, point);
            return;
        case Mode::OVERHEAD:
            break;
    }
    throw ConfigError("overhead mode is not runnable over a stream transport");
}

RunReport run_point(const SchedulePoint& point, const BenchmarkConfig& config,
                    std::uint32_t run_index) {
    if (!config.is_sim())
        throw ConfigError("run_point: stream runs need an established connection");

    BenchmarkConfig sim_config = config;
    // A zero service time would collapse simulated elapsed time.
    sim_config.sim_latency_ns = std::max<std::uint64_t>(config.sim_latency_ns, 1);
    auto fabric = create_queue_pair_pair(sim_config);

    switch (config.mode) {
        case Mode::UNIDIR:
            return run_unidirectional(*fabric, point, sim_config, run_index);
        case Mode::BIDIR:
            return run_bidirectional(*fabric, point, sim_config, run_index);
        case Mode::LATENCY:
            return run_onesided_latency(*fabric, point, sim_config, run_index);
        case Mode::PINGPONG:
        case Mode::OVERHEAD:
            // Overhead measurement runs the aggregation-free ping-pong
            // pattern and reads the port counters off the same run.
            return run_pingpong(*fabric, point, sim_config, run_index);
    }
    throw ConfigError("run_point: unknown mode");
}

RunMetrics metrics_of(const RunReport& report) {
    RunMetrics m;
    m.payload_size = report.payload_size;
    const Throughput t = throughput(report.messages, report.payload_size, report.elapsed_ns);
    m.mmps = t.mmps;
    m.mbps = t.mbps;
    if (report.latency_samples && !report.latency_samples->empty())
        m.latency = summarize(*report.latency_samples);
    if (report.wire_bytes) {
        const std::uint64_t payload_total = report.messages * report.payload_size;
        if (payload_total > 0 && *report.wire_bytes >= payload_total)
            m.overhead_pct = 100.0 *
                             static_cast<double>(*report.wire_bytes - payload_total) /
                             static_cast<double>(payload_total);
    }
    return m;
}

AggregatedPoint aggregate_runs(const std::vector<RunReport>& reports) {
    std::vector<RunMetrics> metrics;
    metrics.reserve(reports.size());
    for (const RunReport& r : reports)
        metrics.push_back(metrics_of(r));
    return aggregate_runs(metrics);
}

}  // namespace wirebench
