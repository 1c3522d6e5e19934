#include "cinetrack/quality.hpp"

#include <cmath>

#include "cinetrack/preprocess.hpp"
#include "cinetrack/stats.hpp"

namespace cinetrack {

QualityFeatures quality_features(const Frame& frame) {
    const Raster& img = frame.image();
    QualityFeatures f;

    f.contrast = mean_std(img.data).std;

    // variance of the 3x3 Laplacian (center -4, cross +1) over interior pixels
    std::vector<double> lap;
    lap.reserve(static_cast<std::size_t>(img.width - 2) * (img.height - 2));
    for (int y = 1; y < img.height - 1; ++y)
        for (int x = 1; x < img.width - 1; ++x)
            lap.push_back(img.at(x - 1, y) + img.at(x + 1, y) + img.at(x, y - 1) +
                          img.at(x, y + 1) - 4.0 * img.at(x, y));
    const MeanStd lap_stats = mean_std(lap);
    f.sharpness = lap_stats.std * lap_stats.std;

    // MAD of the residual against a sigma=1 smoothing
    const Raster smooth = gaussian_smooth(img, 1.0);
    std::vector<double> residual(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i)
        residual[i] = img.data[i] - smooth.data[i];
    f.noise = mad(residual);

    return f;
}

CorpusStats fit_corpus_stats(const std::vector<QualityFeatures>& corpus) {
    if (corpus.empty()) throw std::invalid_argument("fit_corpus_stats: empty corpus");
    std::vector<double> c(corpus.size()), s(corpus.size()), n(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        c[i] = corpus[i].contrast;
        s[i] = corpus[i].sharpness;
        n[i] = corpus[i].noise;
    }
    CorpusStats st;
    st.median_contrast = median(c);
    st.mad_contrast = mad(c);
    st.median_sharpness = median(s);
    st.mad_sharpness = mad(s);
    st.median_noise = median(n);
    st.mad_noise = mad(n);
    st.fitted = true;
    return st;
}

double nriqa_score(const QualityFeatures& f, const CorpusStats& stats, double noise_weight) {
    if (!stats.fitted) throw std::logic_error("nriqa_score: corpus stats not fitted");
    double score = 0.0;
    if (stats.mad_contrast > 0.0)
        score += (f.contrast - stats.median_contrast) / stats.mad_contrast;
    if (stats.mad_sharpness > 0.0)
        score += (f.sharpness - stats.median_sharpness) / stats.mad_sharpness;
    if (stats.mad_noise > 0.0)
        score -= noise_weight * (f.noise - stats.median_noise) / stats.mad_noise;
    return score;
}

QualityGate fit_gate(const std::vector<double>& scores) {
    if (scores.size() < 20)
        throw std::invalid_argument("fit_gate: need at least 20 scores");
    QualityGate gate;
    gate.threshold = percentile(scores, QualityGate::kPercentile);
    gate.fitted = true;
    return gate;
}

bool admit(double score, const QualityGate& gate) {
    if (!gate.fitted) throw std::logic_error("admit: gate not fitted");
    return score >= gate.threshold;
}

}  // namespace cinetrack
