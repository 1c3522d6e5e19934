#include "cinetrack/preprocess.hpp"

#include <cmath>

#include "cinetrack/stats.hpp"

namespace cinetrack {

void PreprocessConfig::validate() const {
    if (low_pct < 0.0 || high_pct > 100.0 || low_pct >= high_pct)
        throw std::invalid_argument("preprocess: need 0 <= low_pct < high_pct <= 100");
    if (gamma <= 0.0) throw std::invalid_argument("preprocess: gamma must be positive");
    if (sigma < 0.0) throw std::invalid_argument("preprocess: sigma must be nonnegative");
}

Frame normalize_gray(const Frame& frame, double low_pct, double high_pct) {
    const double lo = percentile(frame.image().data, low_pct);
    const double hi = percentile(frame.image().data, high_pct);
    Raster out(frame.width(), frame.height());
    if (hi > lo) {
        const double inv = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            double v = (frame.image().data[i] - lo) * inv;
            out.data[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        }
    }
    return {std::move(out), frame.spacing(), frame.index(), frame.timestamp()};
}

Frame gamma_correct(const Frame& frame, double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("gamma_correct: gamma must be positive");
    Raster out(frame.width(), frame.height());
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::pow(frame.image().data[i], gamma);
    return {std::move(out), frame.spacing(), frame.index(), frame.timestamp()};
}

Raster gaussian_smooth(const Raster& img, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_smooth: sigma must be nonnegative");
    if (sigma == 0.0) return img;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    Raster tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * img.at_clamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    Raster out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at_clamped(x, y + i);
            out.at(x, y) = acc;
        }
    return out;
}

Frame gaussian_smooth(const Frame& frame, double sigma) {
    Raster out = gaussian_smooth(frame.image(), sigma);
    // convex combination of values in [0,1]; clamp rounding residue anyway
    for (double& v : out.data) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return {std::move(out), frame.spacing(), frame.index(), frame.timestamp()};
}

Frame preprocess(const Frame& frame, const PreprocessConfig& cfg) {
    cfg.validate();
    return gaussian_smooth(gamma_correct(normalize_gray(frame, cfg.low_pct, cfg.high_pct), cfg.gamma),
                           cfg.sigma);
}

}  // namespace cinetrack
