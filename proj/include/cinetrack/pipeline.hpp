#pragma once

#include <deque>
#include <optional>

#include "cinetrack/detector.hpp"
#include "cinetrack/learning.hpp"
#include "cinetrack/medianflow.hpp"
#include "cinetrack/metrics.hpp"
#include "cinetrack/preprocess.hpp"
#include "cinetrack/quality.hpp"

namespace cinetrack {

struct PipelineParams {
    TrackerParams tracker;
    DetectorParams detector;
    LearnParams learning;
    int threads = 1;
    // detector overrides a live tracker only with this similarity margin
    double detector_margin = 0.05;
    // per-frame tracker scale clamp
    double min_scale_step = 0.8;
    double max_scale_step = 1.25;
    // consecutive invalid frames before falling back to a global scan
    int max_invalid_before_global = 10;
};

/// Per-frame ETLD state: appearance model, scan grid, search region, and the
/// last tracked box. Single writer; step() must be called in frame order.
class Pipeline {
public:
    Pipeline(const Frame& first_frame, const BoundingBox& init_box, const PipelineParams& params);

    /// Processes the next (preprocessed, admitted) frame.
    TrackResult step(const Frame& frame);

    /// Records a quality-rejected frame: invalid result, model and search
    /// region untouched, tracking resumes from the last admitted frame.
    TrackResult step_rejected(const Frame& frame);

    const Trajectory& trajectory() const { return trajectory_; }
    const ObjectModel& model() const { return model_; }
    const SearchRegion& region() const { return region_; }
    const ScanGrid& grid() const { return grid_; }

private:
    TrackResult make_result(int index, const std::optional<BoundingBox>& box, double confidence,
                            double latency_s) const;
    void note_valid(const BoundingBox& box);
    void note_invalid();

    PipelineParams params_;
    ObjectModel model_;
    ScanGrid grid_;
    SearchRegion region_;
    std::optional<Frame> prev_frame_;     // last admitted frame
    std::optional<BoundingBox> prev_box_; // valid box on the last admitted frame
    std::deque<Point2> valid_centers_;    // recent valid centers for the region
    int consecutive_invalid_ = 0;
    BoundingBox init_box_;                // cumulative scale reference
    Raster init_template_;                // frame-0 appearance anchor
    Point2 origin_center_;                // frame-0 box center, displacement reference
    Spacing spacing_;
    Trajectory trajectory_;
};

struct RunConfigBundle {
    PreprocessConfig preprocess;
    PipelineParams pipeline;
    double nriqa_noise_weight = 4.0;
    // frames are rejected only when below the gate AND this many corpus MADs
    // below the median score; keeps homogeneous clean runs intact
    double nriqa_outlier_guard = 4.0;
};

struct RunOutput {
    Trajectory trajectory;
    std::vector<double> quality_scores;   // per frame, on preprocessed frames
    std::vector<QualityFeatures> quality_features;
    std::vector<bool> admitted;
    QualityGate gate;
    std::vector<Frame> preprocessed;      // kept for downstream segmentation
};

/// Full run: preprocess every frame, fit the quality gate over the run corpus,
/// then init on frame 0 and step frames 1..N-1. Frame 0 failing the gate is an
/// error (callers map it to the quality-gate exit code).
RunOutput run_pipeline(const Sequence& seq, const BoundingBox& init_box,
                       const RunConfigBundle& cfg);

}  // namespace cinetrack
