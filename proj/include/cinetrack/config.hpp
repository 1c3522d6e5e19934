#pragma once

#include <cstdint>
#include <string>

#include "cinetrack/phantom.hpp"
#include "cinetrack/pipeline.hpp"
#include "cinetrack/segmentation.hpp"

namespace cinetrack {

/// Flat namespaced run configuration (pre.*, nriqa.*, mf.*, det.*, learn.*,
/// cv.*, phantom.*). Unknown keys are rejected.
struct RunConfig {
    PreprocessConfig pre;
    double nriqa_noise_weight = 4.0;
    double nriqa_outlier_guard = 4.0;
    TrackerParams mf;
    DetectorParams det;
    LearnParams learn;
    CvParams cv;
    PhantomConfig phantom;
    std::uint64_t seed = 1;
    int threads = 1;

    // pipeline integration knobs (pipe.* keys)
    double detector_margin = 0.05;
    double min_scale_step = 0.8;
    double max_scale_step = 1.25;
    int max_invalid_before_global = 10;

    bool det_seed_overridden = false;
    bool phantom_seed_overridden = false;

    void validate() const;

    /// Applies one "namespace.key" assignment; throws on unknown keys.
    void set_key(const std::string& key, double value);
    void set_key(const std::string& key, const std::string& value);

    /// Merges a flat JSON object (text) into this config.
    void apply_json_text(const std::string& text);
    void apply_json_file(const std::string& path);

    /// Canonical flat JSON of every resolved key.
    std::string to_json() const;

    /// FNV-1a hash of the canonical JSON, hex-encoded.
    std::string hash() const;

    PipelineParams pipeline_params() const;
    RunConfigBundle bundle() const;
};

}  // namespace cinetrack
