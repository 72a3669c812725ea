#pragma once

// Independent reference computations used to check the library. They share no
// code with it and favour directness over speed.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>

namespace oracle {

using Wide = boost::multiprecision::cpp_bin_float_50;

/// Least-squares quartic through (w, y[w-1]) for w = 1..n by forming X'X and
/// X'y explicitly on the raw powers of w and solving with partial-pivot
/// Gaussian elimination in 50-digit arithmetic.
inline std::array<double, 5> normal_equations_quartic(std::span<const double> y) {
    std::array<std::array<Wide, 6>, 5> m{};
    for (std::size_t i = 0; i < y.size(); ++i) {
        const Wide w = static_cast<double>(i + 1);
        std::array<Wide, 9> powers{};
        powers[0] = 1;
        for (std::size_t k = 1; k < powers.size(); ++k) powers[k] = powers[k - 1] * w;
        for (std::size_t r = 0; r < 5; ++r) {
            for (std::size_t c = 0; c < 5; ++c) m[r][c] += powers[r + c];
            m[r][5] += powers[r] * Wide(y[i]);
        }
    }
    for (std::size_t col = 0; col < 5; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < 5; ++r) {
            if (abs(m[r][col]) > abs(m[pivot][col])) pivot = r;
        }
        if (m[pivot][col] == 0) throw std::runtime_error("singular normal equations");
        std::swap(m[col], m[pivot]);
        for (std::size_t r = 0; r < 5; ++r) {
            if (r == col) continue;
            const Wide factor = m[r][col] / m[col][col];
            for (std::size_t c = col; c < 6; ++c) m[r][c] -= factor * m[col][c];
        }
    }
    std::array<double, 5> out{};
    for (std::size_t k = 0; k < 5; ++k) out[k] = static_cast<double>(m[k][5] / m[k][k]);
    return out;
}

/// Closed-form simple regression y = slope x + intercept.
inline std::pair<double, double> simple_regression(std::span<const double> x, std::span<const double> y) {
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<long double>(x.size());
    my /= static_cast<long double>(y.size());
    long double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const long double slope = sxy / sxx;
    return {static_cast<double>(slope), static_cast<double>(my - slope * mx)};
}

/// Week of a day of year: ceil(d / 7), capped at 53.
inline int week_of_day(int day) { return std::min(53, (day + 6) / 7); }

/// Adjusted R^2 straight from its definition with p = 4 predictors.
inline double adjusted_r2(std::span<const double> residuals, std::span<const double> y) {
    const double n = static_cast<double>(y.size());
    double mean = 0;
    for (double v : y) mean += v;
    mean /= n;
    double sst = 0, sse = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sst += (y[i] - mean) * (y[i] - mean);
        sse += residuals[i] * residuals[i];
    }
    return 1.0 - (sse / sst) * (n - 1.0) / (n - 4.0 - 1.0);
}

}  // namespace oracle
