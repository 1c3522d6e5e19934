#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cinetrack/imaging.hpp"
#include "cinetrack/metrics.hpp"

namespace cinetrack {

enum class MotionPattern { kSinusoid, kSin4, kStatic };

MotionPattern motion_pattern_from_string(const std::string& name);
std::string to_string(MotionPattern p);

struct DistractorConfig {
    double cx = 0.0, cy = 0.0;       // center px
    double semi_x = 6.0, semi_y = 6.0;
    double contrast = 0.35;          // darkening, in [0,1]
};

struct PhantomConfig {
    int width = 320;
    int height = 320;
    int n_frames = 50;
    double fps = 4.347;
    Spacing spacing{0.9, 0.9};
    double amplitude = 10.0;         // px, cranio-caudal (y); x gets 0.3x
    double period = 4.0;             // s
    MotionPattern pattern = MotionPattern::kSin4;
    double target_cx = 160.0, target_cy = 160.0;  // base center px
    double target_semi_x = 6.0, target_semi_y = 4.0;
    double target_contrast = 0.35;   // darkening relative to background
    double noise_sigma = 0.03;
    std::optional<DistractorConfig> distractor;
    std::optional<std::pair<int, int>> blank_frames;  // inclusive index range
    std::uint64_t seed = 1;

    void validate() const;
};

/// Analytic displacement of the target center at time t, in px.
struct Displacement {
    double dx = 0.0;
    double dy = 0.0;
};
Displacement motion_model(double t, const PhantomConfig& cfg);

struct PhantomOutput {
    Sequence sequence;
    GroundTruth ground_truth;
};

/// Deterministic synthetic cine sequence with exact ground truth.
PhantomOutput generate(const PhantomConfig& cfg);

/// Writes the sequence directory (NNNN.pgm + meta.json) plus gt_centers.csv
/// and gt_mask_NNNN.png files.
void write_phantom(const std::string& dir, const PhantomOutput& out);

}  // namespace cinetrack
