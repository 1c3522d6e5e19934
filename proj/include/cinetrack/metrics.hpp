#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cinetrack/imaging.hpp"
#include "cinetrack/segmentation.hpp"

namespace cinetrack {

/// Per-frame tracking output. Invalid results carry no box.
struct TrackResult {
    int frame_index = 0;
    std::optional<BoundingBox> box;
    double dx_mm = 0.0;  // displacement of the box center vs frame 0, in mm
    double dy_mm = 0.0;
    double confidence = 0.0;
    bool valid = false;
    double latency_s = 0.0;
};

struct Trajectory {
    std::vector<TrackResult> results;
    Spacing spacing{1.0, 1.0};

    std::size_t size() const { return results.size(); }
};

struct GroundTruth {
    struct Center {
        double cx = 0.0;
        double cy = 0.0;
        bool visible = false;
    };
    std::vector<Center> centers;          // indexed by frame
    std::vector<std::optional<Mask>> masks;  // optional, indexed by frame
};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

struct EvalReport {
    double mae_mm_mean = 0.0;
    double mae_mm_std = 0.0;
    std::optional<double> cc;
    double precision = 0.0;
    double recall = 0.0;
    double theta_px = 20.0;
    std::optional<double> dice_global;
    std::vector<double> dice_per_frame;
    std::vector<double> precision_curve;  // theta = 0..theta_max
    std::vector<double> recall_curve;
    std::optional<double> fps_track_mean, fps_track_std;
    std::optional<double> fps_seg_mean, fps_seg_std;
};

/// Mean +- population std of per-frame Euclidean displacement errors in mm,
/// over frames where both a valid prediction and a visible GT center exist.
std::pair<double, double> mae(const Trajectory& traj, const GroundTruth& gt);

/// Mean of the per-axis Pearson coefficients of predicted vs GT center
/// series; zero-variance axes are dropped; absent if both axes degenerate.
std::optional<double> pearson_cc(const Trajectory& traj, const GroundTruth& gt);

/// Center-error counting at threshold theta (px), over frames with GT:
/// TP = valid and error <= theta, FP = valid and error > theta,
/// FN = GT present but prediction invalid. precision = TP/(TP+FP) (1 when no
/// valid predictions), recall = TP / (GT frame count).
PrecisionRecall precision_recall(const Trajectory& traj, const GroundTruth& gt, double theta_px);

/// One-pass curves for theta = 0..theta_max step 1.
struct PrCurves {
    std::vector<double> precision;
    std::vector<double> recall;
};
PrCurves pr_curves(const Trajectory& traj, const GroundTruth& gt, int theta_max = 50);

/// Dice = 2|A^B| / (|A|+|B|); 1 when both masks are empty.
double dice(const Mask& pred, const Mask& gt);

/// Pooled Dice over aligned mask sequences (missing predictions = empty).
double dice_global(const std::vector<std::optional<Mask>>& pred,
                   const std::vector<std::optional<Mask>>& gt);

/// Per-frame FPS statistics (mean +- population std of 1/latency). The caller
/// excludes the initialization frame.
std::pair<double, double> fps_stats(const std::vector<double>& latencies_s);

}  // namespace cinetrack
