#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wirebench {

// One persisted measurement. Fields a mode does not produce stay empty;
// a failed run keeps its identity columns and carries the error text.
struct CsvRow {
    std::string transport;
    std::string mode;
    std::uint64_t payload_bytes = 0;
    std::uint32_t run = 1;
    std::uint64_t messages = 0;
    std::uint64_t elapsed_ns = 0;
    std::optional<double> mmps;
    std::optional<double> mbps;
    std::optional<double> lat_avg_us;
    std::optional<double> lat_p999_us;
    std::optional<double> lat_p9999_us;
    std::optional<std::uint64_t> wire_bytes;
    std::optional<double> overhead_pct;
    std::string error;

    bool failed() const { return !error.empty(); }
};

// Fixed, versioned header line.
const std::string& csv_header();

// Deterministic serialization: size ascending, run ascending, reals with
// six significant digits. Starts with a "# wirebench-csv v1" comment.
std::string to_csv(std::vector<CsvRow> rows);

void write_csv(const std::vector<CsvRow>& rows, const std::filesystem::path& path);

std::vector<CsvRow> parse_csv(const std::string& text);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

}  // namespace wirebench
