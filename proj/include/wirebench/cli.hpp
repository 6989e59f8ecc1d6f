#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "wirebench/config.hpp"
#include "wirebench/csv.hpp"
#include "wirebench/engine.hpp"

namespace wirebench {

struct CliOptions {
    BenchmarkConfig config;  // validated
    bool emit_csv = false;
    bool emit_plots = false;
};

// --help / --version text, delivered with exit code 0.
struct HelpRequested {
    std::string text;
};

// Parses everything after argv[0] and validates the resulting config.
// Throws ConfigError on usage problems (CLI exit code 2).
CliOptions parse_args(const std::vector<std::string>& args);

// Injection point for tests; the default runs engine::run_point.
using RunFn = std::function<RunReport(const SchedulePoint&, const BenchmarkConfig&,
                                      std::uint32_t)>;

// Runs the whole schedule. A failed run marks that point's remaining
// rows failed and the sweep continues; completed points are flushed to
// the CSV as the sweep progresses. Servers return no rows.
std::vector<CsvRow> orchestrate(const CliOptions& options, const RunFn& run_override = {});

std::filesystem::path csv_path(const CliOptions& options);

// Rebuilds aggregates from CSV rows (the persisted schema is the single
// source plots draw from) and writes the mode's SVG files.
std::vector<std::filesystem::path> emit_plots(const std::vector<CsvRow>& rows,
                                              const CliOptions& options);

// Full CLI: 0 success, 2 usage, 3 I/O, 4 transport failure.
int run_cli(int argc, const char* const* argv);

}  // namespace wirebench
