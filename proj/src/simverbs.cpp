#include "wirebench/simverbs.hpp"

#include <algorithm>
#include <cstring>

#include "wirebench/errors.hpp"
#include "wirebench/overhead.hpp"

namespace wirebench {

TransportKind kind_of(WorkOp op) {
    switch (op) {
        case WorkOp::SEND:
        case WorkOp::RECV:
            return TransportKind::RC_MSG;
        case WorkOp::RDMA_WRITE:
            return TransportKind::RC_RDMA_WRITE;
        case WorkOp::RDMA_READ:
            return TransportKind::RC_RDMA_READ;
    }
    return TransportKind::RC_MSG;
}

bool SimQueuePair::post_send(const WorkRequest& wr) {
    return fabric_->post_send_impl(side_, wr);
}

bool SimQueuePair::post_recv(const WorkRequest& wr) {
    return fabric_->post_recv_impl(side_, wr);
}

std::vector<WorkCompletion> SimQueuePair::poll_cq(std::size_t max) {
    if (max == 0)
        throw ConfigError("poll_cq: max must be >= 1");
    std::vector<WorkCompletion> out(max);
    out.resize(fabric_->poll_cq_impl(side_, out));
    return out;
}

std::size_t SimQueuePair::poll_cq(std::span<WorkCompletion> out) {
    if (out.empty())
        throw ConfigError("poll_cq: max must be >= 1");
    return fabric_->poll_cq_impl(side_, out);
}

std::uint64_t SimQueuePair::read_counter(std::string_view name) const {
    return fabric_->read_counter_impl(side_, name);
}

CounterSet SimQueuePair::counters() const {
    std::lock_guard lock(fabric_->mutex_);
    return fabric_->ep_[side_].counters;
}

std::uint64_t SimQueuePair::mtu() const { return fabric_->settings_.mtu; }

std::uint32_t SimQueuePair::send_queue_depth() const {
    return fabric_->settings_.send_depth;
}

std::uint32_t SimQueuePair::send_occupancy() const {
    std::lock_guard lock(fabric_->mutex_);
    return fabric_->ep_[side_].send_occupancy;
}

std::uint32_t SimQueuePair::max_send_occupancy() const {
    std::lock_guard lock(fabric_->mutex_);
    return fabric_->ep_[side_].max_send_occupancy;
}

std::size_t SimQueuePair::recv_queue_size() const {
    std::lock_guard lock(fabric_->mutex_);
    return fabric_->ep_[side_].recv_queue.size();
}

SimFabric::SimFabric(const SimSettings& settings) : settings_(settings) {
    if (settings_.send_depth == 0 || settings_.recv_depth == 0)
        throw ConfigError("simverbs: queue depths must be >= 1");
    if (!is_power_of_two(settings_.mtu))
        throw ConfigError("simverbs: mtu not a power of two");
    for (int side = 0; side < 2; ++side) {
        qp_[side].fabric_ = this;
        qp_[side].side_ = side;
    }
}

SimFabric::~SimFabric() = default;

std::uint64_t SimFabric::now() const {
    std::lock_guard lock(mutex_);
    return clock_ns_;
}

void SimFabric::advance(std::uint64_t ns) {
    std::lock_guard lock(mutex_);
    clock_ns_ += ns;
    process_due_locked();
}

bool SimFabric::advance_to_next_event() {
    std::lock_guard lock(mutex_);
    std::uint64_t next = UINT64_MAX;
    for (const DirectionState& dir : dir_)
        if (!dir.pipeline.empty())
            next = std::min(next, dir.pipeline.front().next_attempt_ns);
    if (next == UINT64_MAX)
        return false;
    clock_ns_ = std::max(clock_ns_, next);
    process_due_locked();
    return true;
}

std::vector<DeliveryRecord> SimFabric::delivery_log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

bool SimFabric::post_send_impl(int side, const WorkRequest& wr) {
    if (wr.op == WorkOp::RECV)
        throw ConfigError("post_send: RECV posted to the send queue");
    if (!wr.buffer.empty() && wr.buffer.size() < wr.payload_size)
        throw ConfigError("post_send: buffer shorter than payload_size");

    std::lock_guard lock(mutex_);
    EndpointState& ep = ep_[side];
    if (ep.send_occupancy >= settings_.send_depth)
        return false;
    ++ep.send_occupancy;
    ep.max_send_occupancy = std::max(ep.max_send_occupancy, ep.send_occupancy);

    DirectionState& dir = dir_[side];
    const std::uint64_t start = std::max(clock_ns_, dir.tx_free_at);
    InFlight entry;
    entry.wr = wr;
    entry.next_attempt_ns = start + settings_.one_way_latency_ns;
    dir.tx_free_at = entry.next_attempt_ns;
    dir.pipeline.push_back(entry);

    process_due_locked();
    return true;
}

bool SimFabric::post_recv_impl(int side, const WorkRequest& wr) {
    if (wr.op != WorkOp::RECV)
        throw ConfigError("post_recv: work request op must be RECV");

    std::lock_guard lock(mutex_);
    EndpointState& ep = ep_[side];
    if (ep.recv_queue.size() >= settings_.recv_depth)
        return false;
    ep.recv_queue.push_back(wr);
    process_due_locked();
    return true;
}

std::size_t SimFabric::poll_cq_impl(int side, std::span<WorkCompletion> out) {
    std::lock_guard lock(mutex_);
    process_due_locked();
    EndpointState& ep = ep_[side];
    std::size_t n = 0;
    while (n < out.size() && !ep.cq.empty()) {
        out[n++] = ep.cq.front();
        ep.cq.pop_front();
    }
    return n;
}

// Pure read: every clock or queue mutation already delivered what was
// due, so counters are always consistent with the current clock.
std::uint64_t SimFabric::read_counter_impl(int side, std::string_view name) const {
    std::lock_guard lock(mutex_);
    const CounterSet& c = ep_[side].counters;
    if (name == "port_xmit_data")
        return c.port_xmit_data;
    if (name == "rnr_nak_retry_err")
        return c.rnr_nak_retry_err;
    if (name == "messages_completed")
        return c.messages_completed;
    throw ConfigError("read_counter: unknown counter '" + std::string(name) + "'");
}

void SimFabric::process_due_locked() {
    for (;;) {
        int best = -1;
        std::uint64_t best_time = UINT64_MAX;
        for (int d = 0; d < 2; ++d) {
            const DirectionState& dir = dir_[d];
            if (!dir.pipeline.empty() && dir.pipeline.front().next_attempt_ns <= clock_ns_ &&
                dir.pipeline.front().next_attempt_ns < best_time) {
                best = d;
                best_time = dir.pipeline.front().next_attempt_ns;
            }
        }
        if (best < 0)
            return;
        attempt_delivery_locked(best);
    }
}

void SimFabric::attempt_delivery_locked(int direction) {
    DirectionState& dir = dir_[direction];
    InFlight& head = dir.pipeline.front();
    EndpointState& sender = ep_[direction];
    EndpointState& receiver = ep_[1 - direction];
    const std::uint64_t attempt_time = head.next_attempt_ns;

    // Every attempt puts the message on the wire; RNR retransmissions
    // are charged again, like a hardware port counter would.
    sender.counters.port_xmit_data +=
        per_message_wire_bytes(kind_of(head.wr.op), head.wr.payload_size, settings_.mtu);

    if (head.wr.op == WorkOp::SEND && receiver.recv_queue.empty()) {
        if (!head.nak_counted) {
            ++sender.counters.rnr_nak_retry_err;
            head.nak_counted = true;
        }
        if (head.retries_used < settings_.max_rnr_retries) {
            ++head.retries_used;
            head.next_attempt_ns = attempt_time + settings_.rnr_delay_ns;
            return;
        }
        sender.cq.push_back({head.wr.id, CompletionStatus::RNR_RETRY_EXCEEDED, 0});
        --sender.send_occupancy;
    } else if (head.wr.op == WorkOp::SEND) {
        WorkRequest recv_wr = receiver.recv_queue.front();
        receiver.recv_queue.pop_front();

        CompletionStatus recv_status = CompletionStatus::OK;
        if (!recv_wr.buffer.empty()) {
            if (recv_wr.buffer.size() < head.wr.payload_size)
                recv_status = CompletionStatus::ERROR;
            else if (!head.wr.buffer.empty() && head.wr.payload_size > 0)
                std::memcpy(recv_wr.buffer.data(), head.wr.buffer.data(),
                            head.wr.payload_size);
        }
        receiver.cq.push_back({recv_wr.id, recv_status, head.wr.payload_size});
        sender.cq.push_back({head.wr.id, CompletionStatus::OK, head.wr.payload_size});
        ++sender.counters.messages_completed;
        --sender.send_occupancy;
        if (settings_.record_delivery_log)
            log_.push_back({direction, head.wr.id, head.wr.op, attempt_time,
                            head.wr.payload_size});
    } else {
        // One-sided op: completes on the requester without touching the
        // peer's receive queue.
        sender.cq.push_back({head.wr.id, CompletionStatus::OK, head.wr.payload_size});
        ++sender.counters.messages_completed;
        --sender.send_occupancy;
        if (settings_.record_delivery_log)
            log_.push_back({direction, head.wr.id, head.wr.op, attempt_time,
                            head.wr.payload_size});
    }

    dir.pipeline.pop_front();
    // A delayed head holds back everything behind it (in-order RC).
    if (!dir.pipeline.empty())
        dir.pipeline.front().next_attempt_ns =
            std::max(dir.pipeline.front().next_attempt_ns, attempt_time);
}

std::unique_ptr<SimFabric> create_queue_pair_pair(const BenchmarkConfig& config) {
    SimSettings s;
    s.send_depth = config.queue_depth;
    s.recv_depth = config.queue_depth;
    s.mtu = config.mtu;
    s.one_way_latency_ns = config.sim_latency_ns;
    s.rnr_delay_ns = config.rnr_delay_us * 1000;
    s.max_rnr_retries = config.max_rnr_retries;
    return std::make_unique<SimFabric>(s);
}

}  // namespace wirebench
