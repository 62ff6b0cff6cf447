// Static SVG plots of simulation traces: joint trajectories, interaction
// force and the scheduled impedance, one panel per run with stance-phase
// shading. The writer emits a fixed-size document from snprintf-formatted
// coordinates only, so identical records give byte-identical files.
#pragma once

#include "srl/record.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace srl::plot {

enum class PlotKind { Trajectory, Force, Impedance };

inline const char* to_string(PlotKind k) {
    switch (k) {
        case PlotKind::Trajectory: return "trajectory";
        case PlotKind::Force: return "force";
        case PlotKind::Impedance: return "impedance";
    }
    return "?";
}

inline PlotKind plot_kind_from(const std::string& s) {
    if (s == "trajectory") return PlotKind::Trajectory;
    if (s == "force") return PlotKind::Force;
    if (s == "impedance") return PlotKind::Impedance;
    throw ConfigError("plot: unknown kind '" + s +
                      "' (expected trajectory|force|impedance)");
}

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

/// Shaded x-interval (stance regions).
struct Shade {
    double x0 = 0.0;
    double x1 = 0.0;
};

struct Panel {
    std::string title;
    std::string y_label;
    std::vector<Series> series;
    std::vector<Shade> shades;
};

namespace detail {

constexpr double kWidth = 900.0;
constexpr double kPanelHeight = 240.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 34.0;

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

/// Tick step of the form {1, 2, 5} * 10^k giving 4-8 ticks over the span.
inline double nice_step(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    if (r < 1.5) return 1.0 * mag;
    if (r < 3.5) return 2.0 * mag;
    if (r < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

struct AxisMap {
    double v0 = 0.0, v1 = 1.0; ///< data range
    double p0 = 0.0, p1 = 1.0; ///< pixel range
    double at(double v) const { return p0 + (v - v0) / (v1 - v0) * (p1 - p0); }
};

inline void range_of(const std::vector<Series>& series, bool horizontal, double& lo,
                     double& hi) {
    lo = 1e300;
    hi = -1e300;
    for (const auto& s : series)
        for (double v : horizontal ? s.x : s.y) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (lo > hi) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
}

inline void append_panel(std::string& svg, const Panel& panel, double y_top,
                         bool last_panel) {
    double x_lo, x_hi, y_lo, y_hi;
    range_of(panel.series, true, x_lo, x_hi);
    range_of(panel.series, false, y_lo, y_hi);
    const double pad = 0.06 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    AxisMap xm{x_lo, x_hi, kMarginLeft, kWidth - kMarginRight};
    AxisMap ym{y_lo, y_hi, y_top + kPanelHeight - kMarginBottom, y_top + kMarginTop};

    svg += "<rect x=\"" + fmt("%.1f", xm.p0) + "\" y=\"" + fmt("%.1f", ym.p1) +
           "\" width=\"" + fmt("%.1f", xm.p1 - xm.p0) + "\" height=\"" +
           fmt("%.1f", ym.p0 - ym.p1) +
           "\" fill=\"white\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

    for (const auto& sh : panel.shades) {
        const double a = std::clamp(sh.x0, x_lo, x_hi);
        const double b = std::clamp(sh.x1, x_lo, x_hi);
        if (!(b > a)) continue;
        svg += "<rect x=\"" + fmt("%.2f", xm.at(a)) + "\" y=\"" + fmt("%.1f", ym.p1) +
               "\" width=\"" + fmt("%.2f", xm.at(b) - xm.at(a)) + "\" height=\"" +
               fmt("%.1f", ym.p0 - ym.p1) + "\" fill=\"#d0d8e8\" fill-opacity=\"0.5\"/>\n";
    }

    const double xs = nice_step(x_hi - x_lo);
    for (double v = std::ceil(x_lo / xs) * xs; v <= x_hi + 1e-9 * xs; v += xs) {
        const double px = xm.at(v);
        svg += "<line x1=\"" + fmt("%.2f", px) + "\" y1=\"" + fmt("%.1f", ym.p0) +
               "\" x2=\"" + fmt("%.2f", px) + "\" y2=\"" + fmt("%.1f", ym.p0 + 4.0) +
               "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
        if (last_panel)
            svg += "<text x=\"" + fmt("%.2f", px) + "\" y=\"" + fmt("%.1f", ym.p0 + 16.0) +
                   "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
                   fmt("%g", v) + "</text>\n";
    }
    const double ys = nice_step(y_hi - y_lo);
    for (double v = std::ceil(y_lo / ys) * ys; v <= y_hi + 1e-9 * ys; v += ys) {
        const double py = ym.at(v);
        svg += "<line x1=\"" + fmt("%.1f", xm.p0 - 4.0) + "\" y1=\"" + fmt("%.2f", py) +
               "\" x2=\"" + fmt("%.1f", xm.p0) + "\" y2=\"" + fmt("%.2f", py) +
               "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt("%.1f", xm.p0 - 7.0) + "\" y=\"" + fmt("%.2f", py + 3.5) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
               fmt("%g", v) + "</text>\n";
    }

    for (const auto& s : panel.series) {
        if (s.x.size() < 2) continue;
        svg += "<polyline fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"1.2\"";
        if (s.dashed) svg += " stroke-dasharray=\"5,3\"";
        svg += " points=\"";
        // Cap each polyline at ~2000 vertices; a 1 kHz trace does not need
        // more at this resolution and the stride keeps output size stable.
        const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 2000);
        for (std::size_t i = 0; i < s.x.size(); i += stride)
            svg += fmt("%.2f", xm.at(s.x[i])) + "," + fmt("%.2f", ym.at(s.y[i])) + " ";
        if ((s.x.size() - 1) % stride != 0)
            svg += fmt("%.2f", xm.at(s.x.back())) + "," + fmt("%.2f", ym.at(s.y.back()));
        svg += "\"/>\n";
    }

    svg += "<text x=\"" + fmt("%.1f", kMarginLeft) + "\" y=\"" +
           fmt("%.1f", y_top + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\">" + panel.title +
           "</text>\n";
    svg += "<text x=\"" + fmt("%.1f", 14.0) + "\" y=\"" +
           fmt("%.1f", 0.5 * (ym.p0 + ym.p1)) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 " +
           fmt("%.1f", 14.0) + " " + fmt("%.1f", 0.5 * (ym.p0 + ym.p1)) + ")\">" +
           panel.y_label + "</text>\n";

    double lx = xm.p1 - 10.0;
    for (auto it = panel.series.rbegin(); it != panel.series.rend(); ++it) {
        svg += "<text x=\"" + fmt("%.1f", lx) + "\" y=\"" + fmt("%.1f", ym.p1 + 14.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" fill=\"" +
               it->color + "\">" + it->label + "</text>\n";
        lx -= 9.0 * static_cast<double>(it->label.size()) + 14.0;
    }
}

} // namespace detail

/// Render panels stacked vertically into one SVG document string.
inline std::string render_svg(const std::vector<Panel>& panels) {
    if (panels.empty()) throw InvalidStateError("render_svg: no panels");
    for (const auto& p : panels)
        if (p.series.empty() || p.series.front().x.empty())
            throw InvalidStateError("render_svg: empty series in panel '" + p.title + "'");
    const double height = detail::kPanelHeight * static_cast<double>(panels.size());
    std::string svg;
    svg.reserve(1 << 16);
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           detail::fmt("%.0f", detail::kWidth) + "\" height=\"" +
           detail::fmt("%.0f", height) + "\" viewBox=\"0 0 " +
           detail::fmt("%.0f", detail::kWidth) + " " + detail::fmt("%.0f", height) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        detail::append_panel(svg, panels[i],
                             detail::kPanelHeight * static_cast<double>(i),
                             i + 1 == panels.size());
    svg += "</svg>\n";
    return svg;
}

/// Validate first, then write: an invalid panel set must not leave a file.
inline void write_svg(const std::vector<Panel>& panels, const std::string& path) {
    const std::string svg = render_svg(panels);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("write_svg: cannot open " + path);
    out << svg;
}

/// Merge consecutive stance rows into shaded spans. The phase column only
/// changes at controller ticks, so single-tick dropouts mid-stance would
/// slice one visual band into several; gaps shorter than min_gap seconds
/// are absorbed into the surrounding span.
inline std::vector<Shade> stance_shades(const sim::SimRecord& rec,
                                        double min_gap = 0.025) {
    std::vector<Shade> out;
    bool in = false;
    double start = 0.0;
    for (const auto& r : rec.rows) {
        const bool st = r.phase_true == contact::GaitPhase::Stance;
        if (st && !in) {
            in = true;
            start = r.t;
        } else if (!st && in) {
            in = false;
            out.push_back({start, r.t});
        }
    }
    if (in) out.push_back({start, rec.rows.back().t});

    std::vector<Shade> merged;
    for (const auto& s : out) {
        if (!merged.empty() && s.x0 - merged.back().x1 < min_gap)
            merged.back().x1 = s.x1;
        else
            merged.push_back(s);
    }
    return merged;
}

/// One panel of the requested kind from a record. `title` names the run
/// (typically the controller mode).
inline Panel record_panel(const sim::SimRecord& rec, PlotKind kind,
                          const std::string& title) {
    if (rec.rows.empty()) throw InvalidStateError("record_panel: empty record");
    Panel p;
    p.title = title;
    p.shades = stance_shades(rec);
    std::vector<double> t;
    t.reserve(rec.rows.size());
    for (const auto& r : rec.rows) t.push_back(r.t);

    auto col = [&rec](auto getter) {
        std::vector<double> v;
        v.reserve(rec.rows.size());
        for (const auto& r : rec.rows) v.push_back(getter(r));
        return v;
    };

    switch (kind) {
        case PlotKind::Trajectory:
            p.y_label = "joint angle [rad]";
            p.series = {
                {"hip", t, col([](const sim::RecordRow& r) { return r.q_s(0); }),
                 "#1f77b4", false},
                {"hip ref", t, col([](const sim::RecordRow& r) { return r.q_d(0); }),
                 "#1f77b4", true},
                {"knee", t, col([](const sim::RecordRow& r) { return r.q_s(1); }),
                 "#d62728", false},
                {"knee ref", t, col([](const sim::RecordRow& r) { return r.q_d(1); }),
                 "#d62728", true},
            };
            break;
        case PlotKind::Force:
            p.y_label = "vertical force [N]";
            p.series = {
                {"grf", t, col([](const sim::RecordRow& r) { return r.grf; }),
                 "#2ca02c", false},
            };
            break;
        case PlotKind::Impedance:
            p.y_label = "impedance";
            p.series = {
                {"K [N m/rad]", t, col([](const sim::RecordRow& r) { return r.K; }),
                 "#9467bd", false},
                {"B [N m s/rad]", t, col([](const sim::RecordRow& r) { return r.B; }),
                 "#ff7f0e", false},
            };
            break;
    }
    return p;
}

/// Comparison figure: one panel per record, shared kind and layout.
inline void write_comparison_svg(const std::vector<sim::SimRecord>& records,
                                 const std::vector<std::string>& titles, PlotKind kind,
                                 const std::string& path) {
    if (records.size() != titles.size())
        throw InvalidStateError("write_comparison_svg: records/titles length mismatch");
    std::vector<Panel> panels;
    panels.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        panels.push_back(record_panel(records[i], kind, titles[i]));
    write_svg(panels, path);
}

} // namespace srl::plot
