#pragma once

#include <cstdint>
#include <vector>

#include "wirebench/config.hpp"

namespace wirebench {

struct SchedulePoint {
    std::uint64_t payload_size = 0;
    std::uint64_t message_count = 0;
};

// One point per power of two in [min_size, max_size], ascending.
// Counts stay at base_count below halve_from; at halve_from * 2^k the
// count is base_count / 2^(k+1) (floored, clamped to at least 1).
std::vector<SchedulePoint> build_schedule(std::uint64_t base_count,
                                          std::uint64_t min_size,
                                          std::uint64_t max_size,
                                          std::uint64_t halve_from);

std::vector<SchedulePoint> build_schedule(const BenchmarkConfig& config);

}  // namespace wirebench
