#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace wirebench {

constexpr bool is_power_of_two(std::uint64_t v) {
    return v != 0 && (v & (v - 1)) == 0;
}

// Parses a byte count with an optional binary suffix: "1" -> 1,
// "4K" -> 4096, "1M" -> 1048576. Lowercase suffixes are accepted.
// Throws ConfigError on malformed input or zero.
std::uint64_t parse_size(std::string_view text);

// Inverse of parse_size for the sizes it can represent compactly:
// multiples of 1 MiB get an "M" suffix, multiples of 1 KiB a "K".
std::string format_size(std::uint64_t bytes);

// "MIN:MAX" with parse_size on both halves.
std::pair<std::uint64_t, std::uint64_t> parse_size_range(std::string_view text);

}  // namespace wirebench
