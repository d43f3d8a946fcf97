#include "choquard/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "choquard/bubbles.hpp"
#include "choquard/errors.hpp"

namespace choquard {

namespace {

constexpr double kWidth = 640.0, kHeight = 440.0;
constexpr double kLeft = 72.0, kRight = 24.0, kTop = 44.0, kBottom = 56.0;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;
constexpr int kMaxMarkers = 200;

std::string fmt(const char* pat, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pat, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

struct Range {
    double lo = 0.0, hi = 1.0;
    double clamp(double v) const { return (v - lo) / (hi - lo); }
};

Range spread(const std::vector<double>& v) {
    Range r;
    r.lo = *std::min_element(v.begin(), v.end());
    r.hi = *std::max_element(v.begin(), v.end());
    if (r.lo == r.hi) {
        const double pad = 0.5 * std::max(1.0, std::abs(r.lo));
        r.lo -= pad;
        r.hi += pad;
    }
    return r;
}

void validate(const PlotSeries& s, bool positive) {
    if (s.x.empty() || s.y.empty()) throw ConfigError("plot series is empty");
    if (s.x.size() != s.y.size()) {
        throw ConfigError("plot series axes have different lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
            throw ConfigError("plot series holds a nonfinite value");
        }
        if (positive && (s.x[i] <= 0.0 || s.y[i] <= 0.0)) {
            throw ConfigError("log-log plot needs positive data");
        }
    }
}

} // namespace

std::string render_plot(const PlotSeries& series, PlotKind kind) {
    const bool loglog = kind == PlotKind::rate_fit;
    validate(series, loglog);
    const std::size_t n = series.x.size();

    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = loglog ? std::log10(series.x[i]) : series.x[i];
        ys[i] = loglog ? std::log10(series.y[i]) : series.y[i];
    }
    const Range rx = spread(xs), ry = spread(ys);
    const auto px = [&](double v) { return kLeft + rx.clamp(v) * kPlotW; };
    const auto py = [&](double v) { return kTop + (1.0 - ry.clamp(v)) * kPlotH; };

    std::string x_label = series.x_label, y_label = series.y_label;
    if (x_label.empty()) {
        x_label = kind == PlotKind::trace ? "iteration"
                : kind == PlotKind::rate_fit ? "epsilon" : "radius";
    }
    if (y_label.empty()) {
        y_label = kind == PlotKind::trace ? "quotient"
                : kind == PlotKind::rate_fit ? "deficit" : "value";
    }

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" "
           "viewBox=\"0 0 640 440\" font-family=\"monospace\" font-size=\"12\">\n";
    svg += "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
    svg += "<rect x=\"" + fmt("%.1f", kLeft) + "\" y=\"" + fmt("%.1f", kTop) +
           "\" width=\"" + fmt("%.1f", kPlotW) + "\" height=\"" + fmt("%.1f", kPlotH) +
           "\" fill=\"none\" stroke=\"#444444\"/>\n";

    // tick marks and labels on both axes
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        const double xv = rx.lo + f * (rx.hi - rx.lo);
        const double yv = ry.lo + f * (ry.hi - ry.lo);
        const double gx = kLeft + f * kPlotW;
        const double gy = kTop + (1.0 - f) * kPlotH;
        svg += "<line x1=\"" + fmt("%.1f", gx) + "\" y1=\"" + fmt("%.1f", kTop + kPlotH) +
               "\" x2=\"" + fmt("%.1f", gx) + "\" y2=\"" + fmt("%.1f", kTop + kPlotH + 5) +
               "\" stroke=\"#444444\"/>\n";
        svg += "<line x1=\"" + fmt("%.1f", kLeft - 5) + "\" y1=\"" + fmt("%.1f", gy) +
               "\" x2=\"" + fmt("%.1f", kLeft) + "\" y2=\"" + fmt("%.1f", gy) +
               "\" stroke=\"#444444\"/>\n";
        const double xshow = loglog ? std::pow(10.0, xv) : xv;
        const double yshow = loglog ? std::pow(10.0, yv) : yv;
        svg += "<text x=\"" + fmt("%.1f", gx) + "\" y=\"" + fmt("%.1f", kTop + kPlotH + 18) +
               "\" text-anchor=\"middle\">" + fmt("%.4g", xshow) + "</text>\n";
        svg += "<text x=\"" + fmt("%.1f", kLeft - 8) + "\" y=\"" + fmt("%.1f", gy + 4) +
               "\" text-anchor=\"end\">" + fmt("%.4g", yshow) + "</text>\n";
    }

    // fitted power line behind the data, slope annotated
    if (loglog && n >= 2) {
        try {
            const LinearFit fit = fit_log_slope(series.x, series.y);
            const double ln10 = std::log(10.0);
            const auto line_y = [&](double lx) {
                return (fit.intercept + fit.slope * lx * ln10) / ln10;
            };
            svg += "<line x1=\"" + fmt("%.2f", px(rx.lo)) + "\" y1=\"" +
                   fmt("%.2f", py(line_y(rx.lo))) + "\" x2=\"" + fmt("%.2f", px(rx.hi)) +
                   "\" y2=\"" + fmt("%.2f", py(line_y(rx.hi))) +
                   "\" stroke=\"#d62728\" stroke-dasharray=\"6 3\" stroke-width=\"1.5\"/>\n";
            svg += "<text x=\"" + fmt("%.1f", kLeft + kPlotW - 8) + "\" y=\"" +
                   fmt("%.1f", kTop + 16) + "\" text-anchor=\"end\" fill=\"#d62728\">slope " +
                   fmt("%.3f", fit.slope) + "</text>\n";
        } catch (const FitError&) {
            // degenerate abscissas; draw the data without an overlay
        }
    }

    if (n >= 2) {
        svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (i) svg += ' ';
            svg += fmt("%.2f", px(xs[i])) + "," + fmt("%.2f", py(ys[i]));
        }
        svg += "\"/>\n";
    }
    const std::size_t stride = n <= kMaxMarkers ? 1 : (n + kMaxMarkers - 1) / kMaxMarkers;
    for (std::size_t i = 0; i < n; i += stride) {
        svg += "<circle cx=\"" + fmt("%.2f", px(xs[i])) + "\" cy=\"" + fmt("%.2f", py(ys[i])) +
               "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }

    if (!series.title.empty()) {
        svg += "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" +
               escape(series.title) + "</text>\n";
    }
    svg += "<text x=\"" + fmt("%.1f", kLeft + kPlotW / 2) +
           "\" y=\"428\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    svg += "<text x=\"20\" y=\"" + fmt("%.1f", kTop + kPlotH / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
           fmt("%.1f", kTop + kPlotH / 2) + ")\">" + escape(y_label) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const PlotSeries& series, PlotKind kind, const std::string& path) {
    const std::string body = render_plot(series, kind);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out.good()) throw IoError("failed writing " + path);
}

} // namespace choquard
