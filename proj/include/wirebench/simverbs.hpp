#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string_view>
#include <vector>

#include "wirebench/config.hpp"

namespace wirebench {

enum class WorkOp : std::uint8_t { SEND, RDMA_WRITE, RDMA_READ, RECV };

enum class CompletionStatus : std::uint8_t { OK, RNR_RETRY_EXCEEDED, ERROR };

// One work queue element. The buffer is optional: an empty span makes
// the request bookkeeping-only (sizes and counters still apply). A
// non-empty buffer must cover payload_size for sends; receive buffers
// shorter than an arriving payload complete with ERROR. RDMA requests
// carry no immediate data and move no simulated bytes.
struct WorkRequest {
    std::uint64_t id = 0;
    WorkOp op = WorkOp::SEND;
    std::uint32_t payload_size = 0;
    std::span<std::byte> buffer;
};

struct WorkCompletion {
    std::uint64_t request_id = 0;
    CompletionStatus status = CompletionStatus::OK;
    std::uint32_t bytes = 0;
};

struct CounterSet {
    std::uint64_t port_xmit_data = 0;     // wire bytes incl. headers and retransmits
    std::uint64_t rnr_nak_retry_err = 0;  // sends that hit receiver-not-ready
    std::uint64_t messages_completed = 0;
};

struct SimSettings {
    std::uint32_t send_depth = 128;
    std::uint32_t recv_depth = 128;
    std::uint64_t mtu = 4096;
    // Per-message service time; doubles as the one-way flight latency.
    // Each endpoint transmits serially, so back-to-back messages arrive
    // latency_ns apart and a ping-pong round trip takes exactly twice it.
    std::uint64_t one_way_latency_ns = 0;
    std::uint64_t rnr_delay_ns = 100'000;
    std::uint32_t max_rnr_retries = 7;
    bool record_delivery_log = false;
};

struct DeliveryRecord {
    int from_side = 0;
    std::uint64_t wr_id = 0;
    WorkOp op = WorkOp::SEND;
    std::uint64_t time_ns = 0;
    std::uint32_t bytes = 0;
};

class SimFabric;

// One simulated RC endpoint. A handle; the fabric owns all state and
// synchronizes cross-endpoint delivery. Each endpoint should be driven
// by at most one thread at a time.
class SimQueuePair {
  public:
    // Enqueues a SEND / RDMA_WRITE / RDMA_READ. Returns false when the
    // send queue is at queue depth (caller polls and retries). A SEND
    // arriving while the peer has no receive posted takes the RNR path:
    // the counter ticks once per request and delivery retries every
    // rnr_delay until max_rnr_retries is exhausted.
    [[nodiscard]] bool post_send(const WorkRequest& wr);

    // Enqueues a RECV, matched FIFO against incoming sends.
    [[nodiscard]] bool post_recv(const WorkRequest& wr);

    // Up to `max` completions in completion order; empty when none are
    // pending. Never blocks.
    std::vector<WorkCompletion> poll_cq(std::size_t max);
    std::size_t poll_cq(std::span<WorkCompletion> out);

    // "port_xmit_data", "rnr_nak_retry_err" or "messages_completed".
    std::uint64_t read_counter(std::string_view name) const;
    CounterSet counters() const;

    std::uint64_t mtu() const;
    std::uint32_t send_queue_depth() const;
    std::uint32_t send_occupancy() const;
    std::uint32_t max_send_occupancy() const;  // high-water mark
    std::size_t recv_queue_size() const;

    SimFabric& fabric() { return *fabric_; }

  private:
    friend class SimFabric;
    SimFabric* fabric_ = nullptr;
    int side_ = 0;
};

// A linked pair of simulated queue pairs sharing one logical clock.
// Time never advances on its own: the driving loop steps it, so every
// schedule of posts and polls replays bit-for-bit.
class SimFabric {
  public:
    explicit SimFabric(const SimSettings& settings);
    ~SimFabric();
    SimFabric(const SimFabric&) = delete;
    SimFabric& operator=(const SimFabric&) = delete;

    SimQueuePair& end_a() { return qp_[0]; }
    SimQueuePair& end_b() { return qp_[1]; }

    std::uint64_t now() const;

    // Moves the clock forward and delivers everything that came due.
    void advance(std::uint64_t ns);

    // Jumps to the next scheduled delivery or retry; false if nothing
    // is in flight.
    bool advance_to_next_event();

    const SimSettings& settings() const { return settings_; }
    std::vector<DeliveryRecord> delivery_log() const;

  private:
    friend class SimQueuePair;

    struct InFlight {
        WorkRequest wr;
        std::uint64_t next_attempt_ns = 0;
        std::uint32_t retries_used = 0;
        bool nak_counted = false;
    };

    struct EndpointState {
        std::deque<WorkRequest> recv_queue;
        std::deque<WorkCompletion> cq;
        CounterSet counters;
        std::uint32_t send_occupancy = 0;
        std::uint32_t max_send_occupancy = 0;
    };

    struct DirectionState {  // index d carries endpoint d -> endpoint 1-d
        std::deque<InFlight> pipeline;
        std::uint64_t tx_free_at = 0;
    };

    bool post_send_impl(int side, const WorkRequest& wr);
    bool post_recv_impl(int side, const WorkRequest& wr);
    std::size_t poll_cq_impl(int side, std::span<WorkCompletion> out);
    std::uint64_t read_counter_impl(int side, std::string_view name) const;

    void process_due_locked();
    void attempt_delivery_locked(int direction);

    SimSettings settings_;
    mutable std::mutex mutex_;
    std::uint64_t clock_ns_ = 0;
    EndpointState ep_[2];
    DirectionState dir_[2];
    SimQueuePair qp_[2];
    std::vector<DeliveryRecord> log_;
};

// Two linked endpoints in connected state, empty queues, zeroed
// counters. Queue depths, MTU and RNR timing come from the config.
std::unique_ptr<SimFabric> create_queue_pair_pair(const BenchmarkConfig& config);

// The wire model an op is charged under.
TransportKind kind_of(WorkOp op);

}  // namespace wirebench
