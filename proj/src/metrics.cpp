#include "cinetrack/metrics.hpp"

#include <cmath>

#include "cinetrack/stats.hpp"

namespace cinetrack {

namespace {

// frames where a valid prediction and a visible GT center coexist
std::vector<std::size_t> overlapping_frames(const Trajectory& traj, const GroundTruth& gt) {
    std::vector<std::size_t> idx;
    const std::size_t n = std::min(traj.results.size(), gt.centers.size());
    for (std::size_t i = 0; i < n; ++i)
        if (traj.results[i].valid && gt.centers[i].visible) idx.push_back(i);
    return idx;
}

}  // namespace

std::pair<double, double> mae(const Trajectory& traj, const GroundTruth& gt) {
    const auto idx = overlapping_frames(traj, gt);
    if (idx.empty()) throw std::invalid_argument("mae: no overlapping frames");

    // GT displacement reference: first visible GT center
    std::size_t ref = 0;
    while (ref < gt.centers.size() && !gt.centers[ref].visible) ++ref;
    const double gx0 = gt.centers[ref].cx;
    const double gy0 = gt.centers[ref].cy;

    std::vector<double> errors;
    errors.reserve(idx.size());
    for (std::size_t i : idx) {
        const TrackResult& r = traj.results[i];
        const double gdx = (gt.centers[i].cx - gx0) * traj.spacing.x_mm;
        const double gdy = (gt.centers[i].cy - gy0) * traj.spacing.y_mm;
        const double ex = r.dx_mm - gdx;
        const double ey = r.dy_mm - gdy;
        errors.push_back(std::sqrt(ex * ex + ey * ey));
    }
    const MeanStd ms = mean_std(errors);
    return {ms.mean, ms.std};
}

std::optional<double> pearson_cc(const Trajectory& traj, const GroundTruth& gt) {
    const auto idx = overlapping_frames(traj, gt);
    if (idx.size() < 2) throw std::invalid_argument("pearson_cc: need at least 2 overlapping frames");

    auto pearson = [&](bool x_axis) -> std::optional<double> {
        std::vector<double> p, g;
        p.reserve(idx.size());
        g.reserve(idx.size());
        for (std::size_t i : idx) {
            const TrackResult& r = traj.results[i];
            p.push_back(x_axis ? r.box->cx() : r.box->cy());
            g.push_back(x_axis ? gt.centers[i].cx : gt.centers[i].cy);
        }
        const MeanStd mp = mean_std(p);
        const MeanStd mg = mean_std(g);
        if (mp.std == 0.0 || mg.std == 0.0) return std::nullopt;
        double cov = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k)
            cov += (p[k] - mp.mean) * (g[k] - mg.mean);
        cov /= p.size();
        return cov / (mp.std * mg.std);
    };

    const auto cx = pearson(true);
    const auto cy = pearson(false);
    if (cx && cy) return (*cx + *cy) / 2.0;
    if (cx) return cx;
    if (cy) return cy;
    return std::nullopt;
}

PrecisionRecall precision_recall(const Trajectory& traj, const GroundTruth& gt, double theta_px) {
    if (theta_px < 0.0) throw std::invalid_argument("precision_recall: theta must be nonnegative");
    std::size_t gt_frames = 0, tp = 0, fp = 0;
    const std::size_t n = std::min(traj.results.size(), gt.centers.size());
    bool any_gt = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!gt.centers[i].visible) continue;
        any_gt = true;
        ++gt_frames;
        const TrackResult& r = traj.results[i];
        if (!r.valid) continue;
        const double ex = r.box->cx() - gt.centers[i].cx;
        const double ey = r.box->cy() - gt.centers[i].cy;
        if (std::sqrt(ex * ex + ey * ey) <= theta_px) ++tp;
        else ++fp;
    }
    if (!any_gt) throw std::invalid_argument("precision_recall: no GT frames");

    PrecisionRecall pr;
    pr.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
    pr.recall = static_cast<double>(tp) / gt_frames;
    return pr;
}

PrCurves pr_curves(const Trajectory& traj, const GroundTruth& gt, int theta_max) {
    PrCurves curves;
    curves.precision.reserve(theta_max + 1);
    curves.recall.reserve(theta_max + 1);
    for (int theta = 0; theta <= theta_max; ++theta) {
        const PrecisionRecall pr = precision_recall(traj, gt, theta);
        curves.precision.push_back(pr.precision);
        curves.recall.push_back(pr.recall);
    }
    return curves;
}

double dice(const Mask& pred, const Mask& gt) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("dice: mask dimensions differ");
    std::size_t inter = 0, a = 0, b = 0;
    for (std::size_t i = 0; i < pred.bits.size(); ++i) {
        a += pred.bits[i];
        b += gt.bits[i];
        inter += pred.bits[i] & gt.bits[i];
    }
    if (a + b == 0) return 1.0;  // vacuous agreement
    return 2.0 * inter / static_cast<double>(a + b);
}

double dice_global(const std::vector<std::optional<Mask>>& pred,
                   const std::vector<std::optional<Mask>>& gt) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("dice_global: sequence lengths differ");
    double inter2 = 0.0, total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!gt[i]) continue;
        std::size_t a = 0, b = gt[i]->area(), inter = 0;
        if (pred[i]) {
            if (pred[i]->width != gt[i]->width || pred[i]->height != gt[i]->height)
                throw std::invalid_argument("dice_global: mask dimensions differ at frame " +
                                            std::to_string(i));
            a = pred[i]->area();
            for (std::size_t k = 0; k < gt[i]->bits.size(); ++k)
                inter += pred[i]->bits[k] & gt[i]->bits[k];
        }
        inter2 += 2.0 * inter;
        total += static_cast<double>(a + b);
    }
    if (total == 0.0) return 1.0;
    return inter2 / total;
}

std::pair<double, double> fps_stats(const std::vector<double>& latencies_s) {
    if (latencies_s.size() < 2)
        throw std::invalid_argument("fps_stats: need at least 2 latencies");
    std::vector<double> fps;
    fps.reserve(latencies_s.size());
    for (double l : latencies_s) {
        if (l <= 0.0) throw std::invalid_argument("fps_stats: nonpositive latency");
        fps.push_back(1.0 / l);
    }
    const MeanStd ms = mean_std(fps);
    return {ms.mean, ms.std};
}

}  // namespace cinetrack
