#include "cinetrack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cinetrack/stats.hpp"

namespace cinetrack {

namespace {

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

constexpr int kTemplateSide = 24;
constexpr double kMaxTemplateShift = 1.0;  // px per frame
constexpr double kTemplateNccGate = 0.6;

Raster sample_canonical(const Raster& img, const BoundingBox& box, double dx, double dy) {
    Raster out(kTemplateSide, kTemplateSide);
    for (int y = 0; y < kTemplateSide; ++y) {
        const double sy = box.y + (y + 0.5) * box.h / kTemplateSide - 0.5 + dy;
        for (int x = 0; x < kTemplateSide; ++x) {
            const double sx = box.x + (x + 0.5) * box.w / kTemplateSide - 0.5 + dx;
            out.at(x, y) = img.bilinear(sx, sy);
        }
    }
    return out;
}

/// Sub-pixel alignment of the patch at `box` against the frame-0 template.
/// Gauss-Newton on the template gradients; the correction is clamped and
/// dropped entirely when the aligned patch no longer resembles the template,
/// so appearance change degrades to plain tracking instead of misanchoring.
Point2 align_to_template(const Raster& img, const BoundingBox& box, const Raster& ref) {
    const int side = ref.width;
    // template gradients and normal matrix, canonical pixel units
    double gxx = 0.0, gxy = 0.0, gyy = 0.0;
    std::vector<double> gx(ref.size()), gy(ref.size());
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * side + x;
            gx[i] = (ref.at_clamped(x + 1, y) - ref.at_clamped(x - 1, y)) * 0.5;
            gy[i] = (ref.at_clamped(x, y + 1) - ref.at_clamped(x, y - 1)) * 0.5;
            gxx += gx[i] * gx[i];
            gxy += gx[i] * gy[i];
            gyy += gy[i] * gy[i];
        }
    const double det = gxx * gyy - gxy * gxy;
    if (det <= 1e-12) return {0.0, 0.0};

    const double px_x = box.w / side;  // canonical px -> frame px
    const double px_y = box.h / side;
    double dx = 0.0, dy = 0.0;
    for (int iter = 0; iter < 10; ++iter) {
        const Raster cur = sample_canonical(img, box, dx, dy);
        double bx = 0.0, by = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double diff = ref.data[i] - cur.data[i];
            bx += diff * gx[i];
            by += diff * gy[i];
        }
        const double step_x = (gyy * bx - gxy * by) / det;
        const double step_y = (gxx * by - gxy * bx) / det;
        dx += step_x * px_x;
        dy += step_y * px_y;
        if (std::abs(step_x) < 0.01 && std::abs(step_y) < 0.01) break;
        if (std::abs(dx) > 2.0 * kMaxTemplateShift || std::abs(dy) > 2.0 * kMaxTemplateShift)
            return {0.0, 0.0};  // diverged
    }
    dx = std::clamp(dx, -kMaxTemplateShift, kMaxTemplateShift);
    dy = std::clamp(dy, -kMaxTemplateShift, kMaxTemplateShift);
    if (ncc(sample_canonical(img, box, dx, dy), ref) < kTemplateNccGate) return {0.0, 0.0};
    return {dx, dy};
}

}  // namespace

Pipeline::Pipeline(const Frame& first_frame, const BoundingBox& init_box,
                   const PipelineParams& params)
    : params_(params), spacing_(first_frame.spacing()) {
    const auto start = std::chrono::steady_clock::now();
    if (!init_box.valid() || !init_box.in_frame(first_frame.width(), first_frame.height()))
        throw std::invalid_argument("pipeline: init box not in frame");

    grid_ = build_scan_grid(first_frame.width(), first_frame.height(), init_box,
                            params_.detector);
    model_ = init_model(first_frame, init_box, grid_, params_.learning, params_.detector);

    init_box_ = init_box;
    init_template_ = sample_canonical(first_frame.image(), init_box, 0.0, 0.0);
    origin_center_ = {init_box.cx(), init_box.cy()};
    prev_frame_ = first_frame;
    prev_box_ = init_box;
    valid_centers_.push_back(origin_center_);
    region_ = update_search_region({valid_centers_.begin(), valid_centers_.end()},
                                   first_frame.width(), first_frame.height(), params_.detector);

    trajectory_.spacing = spacing_;
    TrackResult r = make_result(first_frame.index(), init_box, 1.0, elapsed_s(start));
    trajectory_.results.push_back(r);
}

TrackResult Pipeline::make_result(int index, const std::optional<BoundingBox>& box,
                                  double confidence, double latency_s) const {
    TrackResult r;
    r.frame_index = index;
    r.box = box;
    r.valid = box.has_value();
    r.confidence = confidence;
    r.latency_s = latency_s;
    if (box) {
        r.dx_mm = (box->cx() - origin_center_.x) * spacing_.x_mm;
        r.dy_mm = (box->cy() - origin_center_.y) * spacing_.y_mm;
    }
    return r;
}

void Pipeline::note_valid(const BoundingBox& box) {
    consecutive_invalid_ = 0;
    valid_centers_.push_back({box.cx(), box.cy()});
    while (valid_centers_.size() > static_cast<std::size_t>(params_.detector.region_history))
        valid_centers_.pop_front();
}

void Pipeline::note_invalid() {
    ++consecutive_invalid_;
    if (consecutive_invalid_ >= params_.max_invalid_before_global) valid_centers_.clear();
}

TrackResult Pipeline::step(const Frame& frame) {
    const auto start = std::chrono::steady_clock::now();

    // (a) tracker from the previous admitted frame's valid box
    std::optional<BoundingBox> tracker_box;
    double tracker_sim = 0.0;
    double tracker_reliability = 0.0;
    if (prev_box_ && prev_frame_) {
        const auto points = seed_grid_points(*prev_box_, params_.tracker.grid);
        auto matches = lk_track(*prev_frame_, frame, points, params_.tracker, params_.threads);
        matches = fb_ncc_filter(*prev_frame_, frame, matches, params_.tracker, params_.threads);
        BoxMotion motion = estimate_box_motion(*prev_box_, matches, points.size());
        tracker_reliability = motion.reliability;
        if (motion.ok) {
            const double s = std::clamp(motion.scale, params_.min_scale_step,
                                        params_.max_scale_step);
            BoundingBox candidate =
                prev_box_->scaled_about_center(s).translated(motion.dx, motion.dy);
            // targets do not change size much; bound the cumulative scale
            // against the initial box so slow scale drift cannot build up
            const double w_lo = init_box_.w * params_.min_scale_step;
            const double w_hi = init_box_.w * params_.max_scale_step;
            const double h_lo = init_box_.h * params_.min_scale_step;
            const double h_hi = init_box_.h * params_.max_scale_step;
            const double cx = candidate.cx(), cy = candidate.cy();
            candidate.w = std::clamp(candidate.w, w_lo, w_hi);
            candidate.h = std::clamp(candidate.h, h_lo, h_hi);
            candidate.x = cx - candidate.w / 2.0;
            candidate.y = cy - candidate.h / 2.0;
            if (candidate.in_frame(frame.width(), frame.height())) {
                tracker_box = candidate;
                tracker_sim = nn_similarity(
                    normalized_patch_from_box(frame.image(), candidate, model_.patch_side),
                    model_);
            }
        }
    }

    // (b) detector within the search region
    const IntegralImage integral(frame.image());
    const DetectOutput det =
        detect(frame, integral, grid_, model_, region_, params_.detector, params_.threads);

    // (c) integration into a single hypothesis
    std::optional<BoundingBox> out_box;
    double confidence = 0.0;
    bool from_tracker = false;
    if (tracker_box) {
        const Detection* override_det = nullptr;
        for (const Detection& d : det.clusters)
            if (d.similarity > tracker_sim + params_.detector_margin &&
                iou(*tracker_box, d.box) < 0.5) {
                override_det = &d;
                break;  // clusters are sorted by similarity
            }
        if (override_det) {
            out_box = override_det->box;
            confidence = override_det->similarity;
        } else {
            // tracker-weighted center average with close detections: the
            // tracker carries sub-pixel motion and owns the box size, the
            // detections anchor the position against slow drift
            const double tracker_weight = 10.0;
            double cx = tracker_weight * tracker_box->cx();
            double cy = tracker_weight * tracker_box->cy();
            double n = tracker_weight;
            for (const Detection& d : det.clusters)
                if (iou(*tracker_box, d.box) >= 0.5) {
                    cx += d.box.cx();
                    cy += d.box.cy();
                    n += 1.0;
                }
            BoundingBox merged = *tracker_box;
            merged.x = cx / n - merged.w / 2.0;
            merged.y = cy / n - merged.h / 2.0;
            if (!merged.in_frame(frame.width(), frame.height())) merged = *tracker_box;
            out_box = merged;
            confidence = n > tracker_weight
                             ? nn_similarity(normalized_patch_from_box(frame.image(), merged,
                                                                       model_.patch_side),
                                             model_)
                             : tracker_sim;
            from_tracker = true;
        }
    } else if (det.clusters.size() == 1) {
        out_box = det.clusters[0].box;
        confidence = det.clusters[0].similarity;
    }

    // anchor the tracked position against the frame-0 appearance; the learned
    // sets follow the trajectory, so only the initial template is drift-free
    if (out_box && from_tracker) {
        const Point2 shift = align_to_template(frame.image(), *out_box, init_template_);
        const BoundingBox anchored = out_box->translated(shift.x, shift.y);
        if (anchored.in_frame(frame.width(), frame.height())) out_box = anchored;
    }

    // validity: a tracker-only hypothesis needs either model support or a
    // reliable point set behind it
    if (out_box && from_tracker && confidence < params_.detector.nn_threshold &&
        tracker_reliability < 0.5)
        out_box.reset();

    // (d) learn only on trusted tracker-driven frames
    if (out_box && from_tracker && tracker_reliability >= 0.5 &&
        confidence >= params_.learning.core_valid_sim) {
        p_expert(frame, *out_box, grid_, model_, params_.learning);
        n_expert(frame, *out_box, det.fern_survivors, model_, params_.learning);
    }

    // (e) bookkeeping + search region from recent valid centers
    if (out_box) note_valid(*out_box);
    else note_invalid();
    region_ = update_search_region({valid_centers_.begin(), valid_centers_.end()}, frame.width(),
                                   frame.height(), params_.detector);

    prev_frame_ = frame;
    prev_box_ = out_box;

    TrackResult r = make_result(frame.index(), out_box, out_box ? confidence : 0.0,
                                elapsed_s(start));
    trajectory_.results.push_back(r);
    return r;
}

TrackResult Pipeline::step_rejected(const Frame& frame) {
    const auto start = std::chrono::steady_clock::now();
    TrackResult r = make_result(frame.index(), std::nullopt, 0.0, elapsed_s(start));
    trajectory_.results.push_back(r);
    return r;
}

RunOutput run_pipeline(const Sequence& seq, const BoundingBox& init_box,
                       const RunConfigBundle& cfg) {
    if (seq.empty()) throw std::invalid_argument("run_pipeline: empty sequence");
    validate_sequence(seq);

    RunOutput out;
    out.preprocessed.reserve(seq.size());
    for (const Frame& f : seq.frames) out.preprocessed.push_back(preprocess(f, cfg.preprocess));

    out.quality_features.reserve(seq.size());
    for (const Frame& f : out.preprocessed) out.quality_features.push_back(quality_features(f));
    const CorpusStats stats = fit_corpus_stats(out.quality_features);
    out.quality_scores.reserve(seq.size());
    for (const auto& f : out.quality_features)
        out.quality_scores.push_back(nriqa_score(f, stats, cfg.nriqa_noise_weight));

    if (out.quality_scores.size() >= 20) {
        out.gate = fit_gate(out.quality_scores);
    } else {
        // tiny runs cannot fit a stable percentile gate; admit everything
        out.gate.threshold = -std::numeric_limits<double>::infinity();
        out.gate.fitted = true;
    }
    // the percentile gate is relative, so on a homogeneous clean run it would
    // still clip ~5% of good frames; only frames that are also robust
    // outliers versus the run corpus are rejected
    const double score_median = median(out.quality_scores);
    const double score_mad = mad(out.quality_scores);
    const double outlier_cut = score_median - cfg.nriqa_outlier_guard * score_mad;
    out.admitted.reserve(seq.size());
    for (double s : out.quality_scores)
        out.admitted.push_back(admit(s, out.gate) || s >= outlier_cut);

    if (!out.admitted[0])
        throw std::runtime_error("run_pipeline: frame 0 rejected by the quality gate");

    Pipeline pipeline(out.preprocessed[0], init_box, cfg.pipeline);
    for (std::size_t i = 1; i < out.preprocessed.size(); ++i) {
        if (out.admitted[i]) pipeline.step(out.preprocessed[i]);
        else pipeline.step_rejected(out.preprocessed[i]);
    }
    out.trajectory = pipeline.trajectory();
    return out;
}

}  // namespace cinetrack
