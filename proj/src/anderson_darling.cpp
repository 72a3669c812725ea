#include "polyexcess/errors.hpp"
#include "polyexcess/polyfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace polyexcess {

namespace {

// log Phi(z) and log(1 - Phi(z)) through erfc, which stays accurate in the tails.
double log_normal_cdf(double z) {
    const double p = 0.5 * std::erfc(-z / std::sqrt(2.0));
    return std::log(std::max(p, std::numeric_limits<double>::min()));
}

double log_normal_sf(double z) { return log_normal_cdf(-z); }

// D'Agostino & Stephens case 3 (mean and variance estimated).
double p_value_case3(double a2) {
    if (a2 < 0.2) {
        return 1.0 - std::exp(-13.436 + 101.14 * a2 - 223.73 * a2 * a2);
    }
    if (a2 < 0.34) {
        return 1.0 - std::exp(-8.318 + 42.796 * a2 - 59.938 * a2 * a2);
    }
    if (a2 < 0.6) {
        return std::exp(0.9177 - 4.279 * a2 - 1.38 * a2 * a2);
    }
    if (a2 <= 13.0) {
        return std::exp(1.2937 - 5.709 * a2 + 0.0186 * a2 * a2);
    }
    return 0.0;
}

}  // namespace

AndersonDarling anderson_darling(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 8) {
        throw std::invalid_argument("Anderson-Darling test needs at least 8 observations");
    }
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());

    const double dn = static_cast<double>(n);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / dn;
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / (dn - 1.0));
    if (!(sd > 0.0) || x.back() - x.front() <= 1e-12 * std::max(1.0, std::abs(mean))) {
        throw DegenerateSampleError("Anderson-Darling test on a sample without spread");
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = (x[i] - mean) / sd;
        const double zr = (x[n - 1 - i] - mean) / sd;
        sum += (2.0 * static_cast<double>(i) + 1.0) * (log_normal_cdf(zi) + log_normal_sf(zr));
    }

    AndersonDarling result;
    result.statistic = -dn - sum / dn;
    result.adjusted_statistic = result.statistic * (1.0 + 0.75 / dn + 2.25 / (dn * dn));
    result.p_value = std::clamp(p_value_case3(result.adjusted_statistic), 0.0, 1.0);
    return result;
}

}  // namespace polyexcess
