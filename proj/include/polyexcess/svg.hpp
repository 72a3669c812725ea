#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace polyexcess::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    double stroke_width = 1.5;
    bool markers = false;
};

/// Shaded region between `lo` and `hi`.
struct Band {
    std::string label;
    std::vector<double> x;
    std::vector<double> lo;
    std::vector<double> hi;
    std::string color = "#2ca02c";
    double opacity = 0.2;
};

/// Minimal line chart rendered to a standalone SVG document.
class LineChart {
public:
    LineChart(std::string title, std::string x_label, std::string y_label);

    void add_series(Series series);
    void add_band(Band band);
    void add_reference_line(double y, std::string color = "#888888");

    [[nodiscard]] std::string render(int width = 860, int height = 480) const;

private:
    std::string title_;
    std::string x_label_;
    std::string y_label_;
    std::vector<Series> series_;
    std::vector<Band> bands_;
    std::vector<std::pair<double, std::string>> reference_lines_;
};

[[nodiscard]] std::string escape_xml(std::string_view text);

/// Round tick positions inside [lo, hi], about `target` of them. A degenerate
/// range gives the single tick `lo`.
[[nodiscard]] std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace polyexcess::svg
