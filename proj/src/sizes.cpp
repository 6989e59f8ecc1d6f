#include "wirebench/sizes.hpp"

#include <charconv>

#include "wirebench/errors.hpp"

namespace wirebench {

std::uint64_t parse_size(std::string_view text) {
    if (text.empty())
        throw ConfigError("size: empty string");

    std::uint64_t multiplier = 1;
    std::string_view digits = text;
    const char last = text.back();
    if (last == 'K' || last == 'k') {
        multiplier = 1024;
        digits.remove_suffix(1);
    } else if (last == 'M' || last == 'm') {
        multiplier = 1024ULL * 1024ULL;
        digits.remove_suffix(1);
    }

    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
        throw ConfigError("size: malformed value '" + std::string(text) + "'");
    if (value == 0)
        throw ConfigError("size: must be positive, got '" + std::string(text) + "'");
    if (value > UINT64_MAX / multiplier)
        throw ConfigError("size: overflow in '" + std::string(text) + "'");
    return value * multiplier;
}

std::string format_size(std::uint64_t bytes) {
    constexpr std::uint64_t kib = 1024;
    constexpr std::uint64_t mib = 1024 * 1024;
    if (bytes >= mib && bytes % mib == 0)
        return std::to_string(bytes / mib) + "M";
    if (bytes >= kib && bytes % kib == 0)
        return std::to_string(bytes / kib) + "K";
    return std::to_string(bytes);
}

std::pair<std::uint64_t, std::uint64_t> parse_size_range(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ConfigError("sizes: expected MIN:MAX, got '" + std::string(text) + "'");
    return {parse_size(text.substr(0, colon)), parse_size(text.substr(colon + 1))};
}

}  // namespace wirebench
