#include "wirebench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "wirebench/errors.hpp"

namespace wirebench {

namespace {

constexpr double kWidth = 960, kHeight = 540;
constexpr double kLeft = 72, kRight = 72, kTop = 48, kBottom = 64;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Axis tick labels use decimal-style suffixes: 1B ... 1KB ... 1MB.
std::string size_label(std::uint64_t bytes) {
    if (bytes >= 1024 * 1024 && bytes % (1024 * 1024) == 0)
        return std::to_string(bytes / (1024 * 1024)) + "MB";
    if (bytes >= 1024 && bytes % 1024 == 0)
        return std::to_string(bytes / 1024) + "KB";
    return std::to_string(bytes) + "B";
}

struct LinearScale {
    double lo = 0, hi = 1;
    double y(double v) const {
        const double t = (v - lo) / (hi - lo);
        return kTop + kPlotH * (1.0 - t);
    }
};

struct LogScale {
    double lo_exp = 0, hi_exp = 1;  // log10 bounds
    double y(double v) const {
        const double t = (std::log10(v) - lo_exp) / (hi_exp - lo_exp);
        return kTop + kPlotH * (1.0 - t);
    }
};

struct XScale {
    double lo_log2 = 0, hi_log2 = 1;
    double x(std::uint64_t size) const {
        if (hi_log2 == lo_log2)
            return kLeft + kPlotW / 2;
        const double t = (std::log2(static_cast<double>(size)) - lo_log2) /
                         (hi_log2 - lo_log2);
        return kLeft + kPlotW * t;
    }
};

double nice_step(double range, int target_ticks) {
    const double raw = range / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag)
            return m * mag;
    return 10.0 * mag;
}

struct MetricGetter {
    const MinAvgMax* (*get)(const AggregatedPoint&);
};

const MinAvgMax* get_mmps(const AggregatedPoint& p) { return &p.mmps; }
const MinAvgMax* get_mbps(const AggregatedPoint& p) { return &p.mbps; }
const MinAvgMax* get_overhead(const AggregatedPoint& p) {
    return p.overhead_pct ? &*p.overhead_pct : nullptr;
}

class Svg {
  public:
    void open(const std::string& title) {
        out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"540\" "
                "viewBox=\"0 0 960 540\" font-family=\"sans-serif\">\n";
        out_ += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"white\"/>\n";
        text(kWidth / 2, 24, title, 16, "middle");
    }
    void close() { out_ += "</svg>\n"; }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0, const char* dash = nullptr) {
        out_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
                "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
                num(width) + "\"";
        if (dash)
            out_ += std::string(" stroke-dasharray=\"") + dash + "\"";
        out_ += "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& stroke, const char* dash) {
        out_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.5\"";
        if (dash)
            out_ += std::string(" stroke-dasharray=\"") + dash + "\"";
        out_ += " points=\"";
        for (const auto& [x, y] : pts)
            out_ += num(x) + "," + num(y) + " ";
        out_ += "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        out_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
                "\" fill=\"" + fill + "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size,
              const char* anchor = "start", const char* transform = nullptr) {
        out_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
                std::to_string(size) + "\" text-anchor=\"" + anchor + "\"";
        if (transform)
            out_ += std::string(" transform=\"") + transform + "\"";
        out_ += ">" + escape(s) + "</text>\n";
    }

    // min-max whisker with caps; the marker at the average goes on top.
    void error_bar(double x, double y_min, double y_max, const std::string& stroke) {
        line(x, y_min, x, y_max, stroke, 1.0);
        line(x - 4, y_min, x + 4, y_min, stroke, 1.0);
        line(x - 4, y_max, x + 4, y_max, stroke, 1.0);
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                default: out += c;
            }
        }
        return out;
    }

    std::string str() && { return std::move(out_); }

  private:
    std::string out_;
};

std::vector<std::uint64_t> collect_sizes(const PlotSpec& spec) {
    std::vector<std::uint64_t> sizes;
    for (const PlotSeries& s : spec.series)
        for (const AggregatedPoint& p : s.points)
            sizes.push_back(p.payload_size);
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    return sizes;
}

void draw_x_axis(Svg& svg, const XScale& xs, const std::vector<std::uint64_t>& sizes) {
    svg.line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop + kPlotH, "#333", 1.2);
    const std::size_t stride = sizes.size() > 12 ? 2 : 1;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const double x = xs.x(sizes[i]);
        svg.line(x, kTop + kPlotH, x, kTop + kPlotH + 4, "#333");
        if (i % stride == 0)
            svg.text(x, kTop + kPlotH + 18, size_label(sizes[i]), 11, "middle");
    }
    svg.text(kLeft + kPlotW / 2, kHeight - 14, "payload size", 13, "middle");
}

void draw_left_axis(Svg& svg, const LinearScale& sc, const std::string& label) {
    svg.line(kLeft, kTop, kLeft, kTop + kPlotH, "#333", 1.2);
    const double step = nice_step(sc.hi - sc.lo, 5);
    for (double v = 0; v <= sc.hi + 1e-12; v += step) {
        const double y = sc.y(v);
        svg.line(kLeft - 4, y, kLeft, y, "#333");
        svg.line(kLeft, y, kLeft + kPlotW, y, "#eee");
        svg.text(kLeft - 8, y + 4, fmt(v), 11, "end");
    }
    svg.text(16, kTop + kPlotH / 2, label, 13, "middle",
             ("rotate(-90 16 " + num(kTop + kPlotH / 2) + ")").c_str());
}

void draw_right_axis(Svg& svg, const LinearScale& sc, const std::string& label) {
    const double x = kLeft + kPlotW;
    svg.line(x, kTop, x, kTop + kPlotH, "#333", 1.2);
    const double step = nice_step(sc.hi - sc.lo, 5);
    for (double v = 0; v <= sc.hi + 1e-12; v += step) {
        const double y = sc.y(v);
        svg.line(x, y, x + 4, y, "#333");
        svg.text(x + 8, y + 4, fmt(v), 11, "start");
    }
    svg.text(kWidth - 16, kTop + kPlotH / 2, label, 13, "middle",
             ("rotate(90 " + num(kWidth - 16) + " " + num(kTop + kPlotH / 2) + ")").c_str());
}

void draw_log_axis(Svg& svg, const LogScale& sc, const std::string& label) {
    svg.line(kLeft, kTop, kLeft, kTop + kPlotH, "#333", 1.2);
    for (int e = static_cast<int>(sc.lo_exp); e <= static_cast<int>(sc.hi_exp); ++e) {
        const double v = std::pow(10.0, e);
        const double y = sc.y(v);
        svg.line(kLeft - 4, y, kLeft, y, "#333");
        svg.line(kLeft, y, kLeft + kPlotW, y, "#eee");
        svg.text(kLeft - 8, y + 4, fmt(v), 11, "end");
    }
    svg.text(16, kTop + kPlotH / 2, label, 13, "middle",
             ("rotate(-90 16 " + num(kTop + kPlotH / 2) + ")").c_str());
}

void draw_legend(Svg& svg, const PlotSpec& spec, const std::string& dotted_note,
                 const std::string& solid_note) {
    double y = kTop + 10;
    const double x = kLeft + kPlotW - 190;
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const std::string color = kPalette[i % std::size(kPalette)];
        svg.line(x, y - 4, x + 26, y - 4, color, 2.0);
        svg.text(x + 32, y, spec.series[i].name, 12);
        y += 18;
    }
    if (!dotted_note.empty()) {
        svg.line(x, y - 4, x + 26, y - 4, "#333", 1.5, "2 4");
        svg.text(x + 32, y, dotted_note, 11);
        y += 18;
    }
    if (!solid_note.empty()) {
        svg.line(x, y - 4, x + 26, y - 4, "#333", 1.5);
        svg.text(x + 32, y, solid_note, 11);
    }
}

void draw_series_metric(Svg& svg, const PlotSeries& series, const XScale& xs,
                        const std::function<double(double)>& ymap,
                        const MetricGetter& metric, const std::string& color,
                        const char* dash) {
    std::vector<std::pair<double, double>> pts;
    for (const AggregatedPoint& p : series.points) {
        const MinAvgMax* m = metric.get(p);
        if (!m)
            continue;
        pts.emplace_back(xs.x(p.payload_size), ymap(m->avg));
    }
    if (pts.size() > 1)
        svg.polyline(pts, color, dash);
    for (const AggregatedPoint& p : series.points) {
        const MinAvgMax* m = metric.get(p);
        if (!m)
            continue;
        const double x = xs.x(p.payload_size);
        svg.error_bar(x, ymap(m->min), ymap(m->max), color);
        svg.circle(x, ymap(m->avg), 3, color);
    }
}

double metric_max(const PlotSpec& spec, const MetricGetter& metric) {
    double hi = 0;
    for (const PlotSeries& s : spec.series)
        for (const AggregatedPoint& p : s.points)
            if (const MinAvgMax* m = metric.get(p))
                hi = std::max(hi, m->max);
    return hi > 0 ? hi : 1.0;
}

MetricGetter latency_getter(LatencyMetric metric) {
    switch (metric) {
        case LatencyMetric::AVG:
            return {[](const AggregatedPoint& p) {
                return p.avg_us ? &*p.avg_us : nullptr;
            }};
        case LatencyMetric::P999:
            return {[](const AggregatedPoint& p) {
                return p.p999_us ? &*p.p999_us : nullptr;
            }};
        case LatencyMetric::P9999:
            return {[](const AggregatedPoint& p) {
                return p.p9999_us ? &*p.p9999_us : nullptr;
            }};
    }
    return {get_mmps};
}

}  // namespace

std::string render_plot_svg(const PlotSpec& spec) {
    if (spec.series.empty())
        throw ConfigError("render_plot: no series");
    for (const PlotSeries& s : spec.series)
        if (s.points.empty())
            throw ConfigError("render_plot: series '" + s.name + "' has no points");

    const std::vector<std::uint64_t> sizes = collect_sizes(spec);
    XScale xs;
    xs.lo_log2 = std::log2(static_cast<double>(sizes.front()));
    xs.hi_log2 = std::log2(static_cast<double>(sizes.back()));

    Svg svg;
    svg.open(spec.title);
    draw_x_axis(svg, xs, sizes);

    if (spec.kind == PlotKind::THROUGHPUT) {
        LinearScale left{0, metric_max(spec, {get_mmps}) * 1.08};
        LinearScale right{0, metric_max(spec, {get_mbps}) * 1.08};
        draw_left_axis(svg, left, "throughput [mmps]");
        draw_right_axis(svg, right, "throughput [MB/s]");
        for (std::size_t i = 0; i < spec.series.size(); ++i) {
            const std::string color = kPalette[i % std::size(kPalette)];
            draw_series_metric(svg, spec.series[i], xs,
                               [&](double v) { return left.y(v); }, {get_mmps}, color,
                               "2 4");
            draw_series_metric(svg, spec.series[i], xs,
                               [&](double v) { return right.y(v); }, {get_mbps}, color,
                               nullptr);
        }
        draw_legend(svg, spec, "dotted: mmps", "solid: MB/s");
    } else if (spec.kind == PlotKind::LATENCY) {
        const MetricGetter lat = latency_getter(spec.latency_metric);
        LinearScale left{0, metric_max(spec, lat) * 1.08};
        LinearScale right{0, metric_max(spec, {get_mmps}) * 1.08};
        draw_left_axis(svg, left, "latency [us]");
        draw_right_axis(svg, right, "throughput [mmps]");
        for (std::size_t i = 0; i < spec.series.size(); ++i) {
            const std::string color = kPalette[i % std::size(kPalette)];
            draw_series_metric(svg, spec.series[i], xs,
                               [&](double v) { return left.y(v); }, lat, color, nullptr);
            draw_series_metric(svg, spec.series[i], xs,
                               [&](double v) { return right.y(v); }, {get_mmps}, color,
                               "2 4");
        }
        draw_legend(svg, spec, "dotted: mmps", "solid: latency");
    } else {
        double lo = 1e300, hi = 0;
        for (const PlotSeries& s : spec.series)
            for (const AggregatedPoint& p : s.points)
                if (p.overhead_pct) {
                    lo = std::min(lo, std::max(p.overhead_pct->min, 1e-6));
                    hi = std::max(hi, p.overhead_pct->max);
                }
        if (hi <= 0)
            throw ConfigError("render_plot: overhead plot without overhead data");
        LogScale scale;
        scale.lo_exp = std::floor(std::log10(lo));
        scale.hi_exp = std::ceil(std::log10(hi));
        if (scale.hi_exp <= scale.lo_exp)
            scale.hi_exp = scale.lo_exp + 1;
        draw_log_axis(svg, scale, "overhead [%], log scale");
        for (std::size_t i = 0; i < spec.series.size(); ++i) {
            const std::string color = kPalette[i % std::size(kPalette)];
            draw_series_metric(svg, spec.series[i], xs,
                               [&](double v) { return scale.y(std::max(v, 1e-6)); },
                               {get_overhead}, color, nullptr);
        }
        draw_legend(svg, spec, "", "");
    }

    svg.close();
    return std::move(svg).str();
}

void render_plot(const PlotSpec& spec, const std::filesystem::path& path) {
    const std::string svg = render_plot_svg(spec);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw IoError("cannot open '" + path.string() + "' for writing");
    file << svg;
    file.flush();
    if (!file)
        throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace wirebench
