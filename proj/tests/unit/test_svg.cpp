#include "polyexcess/svg.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace polyexcess;

namespace {

std::size_t occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("svg") {

TEST_CASE("xml escaping") {
    CHECK(svg::escape_xml("a<b & \"c\" 'd'>") == "a&lt;b &amp; &quot;c&quot; &apos;d&apos;&gt;");
    CHECK(svg::escape_xml("plain") == "plain");
}

TEST_CASE("nice ticks fall inside the range with round steps") {
    for (auto [lo, hi] : {std::pair{0.0, 1.0}, {-37.2, 512.9}, {1998.0, 2022.0}, {0.001, 0.0047}}) {
        const auto t = svg::nice_ticks(lo, hi);
        REQUIRE(t.size() >= 2);
        CHECK(t.size() <= 12);
        const double step = t[1] - t[0];
        CHECK(t.front() >= lo - 1e-12);
        CHECK(t.back() <= hi + 1e-12);
        CHECK(t.front() - lo < step);
        CHECK(hi - t.back() < step);
        const double mantissa = step / std::pow(10.0, std::floor(std::log10(step) + 1e-12));
        CHECK((std::abs(mantissa - 1) < 1e-9 || std::abs(mantissa - 2) < 1e-9 ||
               std::abs(mantissa - 5) < 1e-9));
        for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] - t[i - 1] == doctest::Approx(step));
    }
    CHECK(svg::nice_ticks(5.0, 5.0) == std::vector<double>{5.0});
    // Zero is printed as zero, not as a rounding remnant.
    const auto around_zero = svg::nice_ticks(-0.3, 0.3);
    CHECK(std::find(around_zero.begin(), around_zero.end(), 0.0) != around_zero.end());
}

TEST_CASE("rendered chart") {
    svg::LineChart chart("Deaths & <excess>", "week", "deaths");
    svg::Series observed{"observed", {1, 2, 3, 4}, {10, 12, std::numeric_limits<double>::quiet_NaN(), 9}};
    observed.markers = true;
    chart.add_series(observed);
    chart.add_series({"expected", {1, 2, 3, 4}, {11, 11, 11, 11}, "#d62728"});
    chart.add_band({"band", {1, 2, 3, 4}, {9, 9, 9, 9}, {13, 13, 13, 13}});
    chart.add_reference_line(0.0);
    const auto text = chart.render(640, 360);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("width=\"640\"") != std::string::npos);
    CHECK(text.find("Deaths &amp; &lt;excess&gt;") != std::string::npos);
    CHECK(text.find("<excess>") == std::string::npos);
    CHECK(text.find("nan") == std::string::npos);
    CHECK(text.find("inf") == std::string::npos);
    CHECK(occurrences(text, "<svg") == occurrences(text, "</svg>"));
    CHECK(occurrences(text, "<g") == occurrences(text, "</g>"));
    CHECK(occurrences(text, "<polygon") >= 1);
    CHECK(occurrences(text, "observed") >= 1);
    CHECK(occurrences(text, "expected") >= 1);
}

TEST_CASE("empty and degenerate charts still render") {
    svg::LineChart empty("empty", "x", "y");
    const auto a = empty.render();
    CHECK(a.find("</svg>") != std::string::npos);
    svg::LineChart flat("flat", "x", "y");
    flat.add_series({"one point", {3}, {7}});
    const auto b = flat.render();
    CHECK(b.find("</svg>") != std::string::npos);
    CHECK(b.find("nan") == std::string::npos);
}

}
