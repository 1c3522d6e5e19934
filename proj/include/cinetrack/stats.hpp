#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cinetrack {

/// Linear-interpolated order statistic: rank = p/100 * (n-1) over the sorted
/// values. The single percentile convention used project-wide.
inline double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (p < 0.0 || p > 100.0) throw std::invalid_argument("percentile: p outside [0,100]");
    std::sort(values.begin(), values.end());
    const double rank = p / 100.0 * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = rank - lo;
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/// Median with the average-of-two-middles convention for even counts.
inline double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double m = values[mid];
    if (n % 2 == 0) {
        std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
        m = (m + values[mid - 1]) / 2.0;
    }
    return m;
}

/// Median absolute deviation (no consistency scaling).
inline double mad(const std::vector<double>& values) {
    const double m = median(values);
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - m);
    return median(std::move(dev));
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population
};

inline MeanStd mean_std(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean_std: empty input");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / values.size())};
}

}  // namespace cinetrack
