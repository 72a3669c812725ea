#include "polyexcess/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace polyexcess::svg {

namespace {

struct Frame {
    double x0, x1, y0, y1;
    double left, right, top, bottom;

    [[nodiscard]] double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
    [[nodiscard]] double py(double y) const { return bottom - (y - y0) / (y1 - y0) * (bottom - top); }
};

std::string num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

std::string tick_label(double v) {
    std::ostringstream os;
    if (std::abs(v) >= 1000 || v == std::floor(v)) {
        os << std::fixed << std::setprecision(0) << v;
    } else {
        os << std::setprecision(3) << v;
    }
    return os.str();
}

}  // namespace

std::string escape_xml(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) {
        return {lo};
    }
    const double raw = (hi - lo) / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
        ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
    }
    return ticks;
}

LineChart::LineChart(std::string title, std::string x_label, std::string y_label)
    : title_{std::move(title)}, x_label_{std::move(x_label)}, y_label_{std::move(y_label)} {}

void LineChart::add_series(Series series) {
    if (series.x.size() != series.y.size()) {
        throw std::invalid_argument("series x and y differ in length");
    }
    series_.push_back(std::move(series));
}

void LineChart::add_band(Band band) {
    if (band.x.size() != band.lo.size() || band.x.size() != band.hi.size()) {
        throw std::invalid_argument("band vectors differ in length");
    }
    bands_.push_back(std::move(band));
}

void LineChart::add_reference_line(double y, std::string color) {
    reference_lines_.emplace_back(y, std::move(color));
}

std::string LineChart::render(int width, int height) const {
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    double y0 = x0;
    double y1 = -x0;
    auto extend = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) {
            return;
        }
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    };
    for (const auto& s : series_) {
        for (std::size_t i = 0; i < s.x.size(); ++i) extend(s.x[i], s.y[i]);
    }
    for (const auto& b : bands_) {
        for (std::size_t i = 0; i < b.x.size(); ++i) {
            extend(b.x[i], b.lo[i]);
            extend(b.x[i], b.hi[i]);
        }
    }
    for (const auto& [y, c] : reference_lines_) {
        if (std::isfinite(x0)) extend(x0, y);
    }
    if (!std::isfinite(x0)) {
        x0 = 0; x1 = 1; y0 = 0; y1 = 1;
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) { y0 -= 1; y1 += 1; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double legend_width = 170;
    const Frame f{x0, x1, y0, y1, 70.0, width - legend_width, 40.0, height - 50.0};

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"15\">"
       << escape_xml(title_) << "</text>\n";

    // Axes, grid and ticks.
    os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double t : nice_ticks(y0, y1)) {
        const double y = f.py(t);
        os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(f.right)
           << "\" y2=\"" << num(y) << "\" stroke=\"#e5e5e5\"/>\n";
        os << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(y + 4)
           << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(x0, x1, 10)) {
        const double x = f.px(t);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.bottom) << "\" x2=\"" << num(x)
           << "\" y2=\"" << num(f.bottom + 4) << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << num(x) << "\" y=\"" << num(f.bottom + 17)
           << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    os << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\""
       << num(f.right - f.left) << "\" height=\"" << num(f.bottom - f.top)
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << num((f.left + f.right) / 2) << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\">" << escape_xml(x_label_) << "</text>\n";
    os << "<text transform=\"translate(16," << num((f.top + f.bottom) / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(y_label_) << "</text>\n";
    os << "</g>\n";

    for (const auto& b : bands_) {
        os << "<polygon fill=\"" << escape_xml(b.color) << "\" fill-opacity=\"" << b.opacity
           << "\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < b.x.size(); ++i) {
            os << num(f.px(b.x[i])) << ',' << num(f.py(b.hi[i])) << ' ';
        }
        for (std::size_t i = b.x.size(); i-- > 0;) {
            os << num(f.px(b.x[i])) << ',' << num(f.py(b.lo[i])) << ' ';
        }
        os << "\"/>\n";
    }
    for (const auto& [y, color] : reference_lines_) {
        os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(y)) << "\" x2=\""
           << num(f.right) << "\" y2=\"" << num(f.py(y)) << "\" stroke=\"" << escape_xml(color)
           << "\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (const auto& s : series_) {
        os << "<polyline fill=\"none\" stroke=\"" << escape_xml(s.color) << "\" stroke-width=\""
           << s.stroke_width << "\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (std::isfinite(s.y[i])) {
                os << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
            }
        }
        os << "\"/>\n";
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (std::isfinite(s.y[i])) {
                    os << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.y[i]))
                       << "\" r=\"2\" fill=\"" << escape_xml(s.color) << "\"/>\n";
                }
            }
        }
    }

    // Legend.
    os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    double ly = f.top + 10;
    auto legend_entry = [&](const std::string& label, const std::string& color, bool filled) {
        const double lx = f.right + 14;
        if (filled) {
            os << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 6) << "\" width=\"18\" height=\"10\" "
               << "fill=\"" << escape_xml(color) << "\" fill-opacity=\"0.3\"/>\n";
        } else {
            os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 18)
               << "\" y2=\"" << num(ly) << "\" stroke=\"" << escape_xml(color)
               << "\" stroke-width=\"2\"/>\n";
        }
        os << "<text x=\"" << num(lx + 24) << "\" y=\"" << num(ly + 4) << "\">" << escape_xml(label)
           << "</text>\n";
        ly += 18;
    };
    for (const auto& s : series_) legend_entry(s.label, s.color, false);
    for (const auto& b : bands_) legend_entry(b.label, b.color, true);
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace polyexcess::svg
