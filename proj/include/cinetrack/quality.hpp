#pragma once

#include <vector>

#include "cinetrack/imaging.hpp"

namespace cinetrack {

struct QualityFeatures {
    double contrast = 0.0;   // RMS contrast (std of pixels)
    double sharpness = 0.0;  // variance of 3x3 Laplacian over interior pixels
    double noise = 0.0;      // MAD of the high-frequency residual
};

/// Per-feature robust location/scale fitted over a corpus.
struct CorpusStats {
    double median_contrast = 0.0, mad_contrast = 0.0;
    double median_sharpness = 0.0, mad_sharpness = 0.0;
    double median_noise = 0.0, mad_noise = 0.0;
    bool fitted = false;
};

struct QualityGate {
    double threshold = 0.0;  // T
    bool fitted = false;
    static constexpr double kPercentile = 5.0;
};

QualityFeatures quality_features(const Frame& frame);

CorpusStats fit_corpus_stats(const std::vector<QualityFeatures>& corpus);

/// MAD-weighted robust z-score sum; contrast and sharpness count positive,
/// the noise feature negative with weight noise_weight. Features whose corpus
/// MAD is zero are dropped.
double nriqa_score(const QualityFeatures& f, const CorpusStats& stats,
                   double noise_weight = 4.0);

/// T = 5th percentile of the fitted scores. Needs at least 20 scores.
QualityGate fit_gate(const std::vector<double>& scores);

/// Admission: score >= T.
bool admit(double score, const QualityGate& gate);

}  // namespace cinetrack
