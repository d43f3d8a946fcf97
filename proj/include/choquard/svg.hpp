#pragma once

#include <string>
#include <vector>

namespace choquard {

enum class PlotKind {
    trace,           // iterate index against a monotone quantity, linear axes
    rate_fit,        // log-log scatter with a fitted power line and its slope
    radial_profile,  // radius against field value, linear axes
};

/// One plotted series. x and y must have equal nonzero length and hold
/// finite values; rate_fit additionally needs positive entries on both
/// axes. Empty labels fall back to kind-specific defaults.
struct PlotSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string title;
    std::string x_label;
    std::string y_label;
};

/// Renders a standalone SVG document: axes with tick labels, markers on
/// every point, a polyline through them, and for rate_fit the least
/// squares power line with its slope annotated. A single point renders as
/// one marker. Throws ConfigError on empty, length-mismatched, nonfinite,
/// or (for rate_fit) nonpositive data.
std::string render_plot(const PlotSeries& series, PlotKind kind);

/// render_plot written to a file. Throws IoError when the file cannot be
/// created or written.
void emit_plot(const PlotSeries& series, PlotKind kind, const std::string& path);

} // namespace choquard
