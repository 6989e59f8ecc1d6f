#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wirebench/stats.hpp"

namespace wirebench {

enum class PlotKind { THROUGHPUT, LATENCY, OVERHEAD };

enum class LatencyMetric { AVG, P999, P9999 };

struct PlotSeries {
    std::string name;
    std::vector<AggregatedPoint> points;  // ascending payload size
};

// Axis conventions: THROUGHPUT plots mmps on the left axis (dotted) and
// MB/s on the right (solid); LATENCY plots microseconds on the left
// (solid) and mmps on the right (dotted); OVERHEAD uses a single
// logarithmic percent axis. The x axis is log2 payload size throughout.
struct PlotSpec {
    PlotKind kind = PlotKind::THROUGHPUT;
    LatencyMetric latency_metric = LatencyMetric::AVG;
    std::string title;
    std::vector<PlotSeries> series;
};

// Self-contained 960x540 SVG with min-max error bars and a marker at
// the average. Throws ConfigError when there is nothing to draw.
std::string render_plot_svg(const PlotSpec& spec);

void render_plot(const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace wirebench
