#pragma once

#include "cinetrack/imaging.hpp"

namespace cinetrack {

struct PreprocessConfig {
    double low_pct = 1.0;
    double high_pct = 99.0;
    double gamma = 0.8;
    double sigma = 0.7;  // px

    void validate() const;
};

/// Percentile stretch to [0,1]; degenerate frames (hi == lo) map to all zeros.
Frame normalize_gray(const Frame& frame, double low_pct, double high_pct);

/// Elementwise v^gamma.
Frame gamma_correct(const Frame& frame, double gamma);

/// Separable Gaussian, kernel radius ceil(3*sigma), edge replication.
/// sigma == 0 returns the frame unchanged.
Frame gaussian_smooth(const Frame& frame, double sigma);

/// Raster-level smoothing used where no Frame metadata exists.
Raster gaussian_smooth(const Raster& img, double sigma);

/// normalize_gray -> gamma_correct -> gaussian_smooth, in that order.
Frame preprocess(const Frame& frame, const PreprocessConfig& cfg);

}  // namespace cinetrack
