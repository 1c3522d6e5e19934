#include "cinetrack/medianflow.hpp"

#include <cmath>

#include "cinetrack/parallel.hpp"
#include "cinetrack/stats.hpp"

namespace cinetrack {

void TrackerParams::validate() const {
    if (pyramid_levels < 1) throw std::invalid_argument("tracker: pyramid_levels must be >= 1");
    if (lk_window < 3 || lk_window % 2 == 0)
        throw std::invalid_argument("tracker: lk_window must be odd and >= 3");
    if (lk_iterations < 1) throw std::invalid_argument("tracker: lk_iterations must be >= 1");
    if (grid < 2) throw std::invalid_argument("tracker: grid must be >= 2");
    if (fb_max <= 0.0) throw std::invalid_argument("tracker: fb_max must be positive");
}

std::vector<Raster> build_pyramid(const Raster& img, int levels) {
    std::vector<Raster> pyr;
    pyr.reserve(levels);
    pyr.push_back(img);
    // 5-tap binomial smoothing before each 2x decimation
    static const double kKernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    for (int level = 1; level < levels; ++level) {
        const Raster& src = pyr.back();
        if (src.width < 8 || src.height < 8) break;
        Raster tmp(src.width, src.height);
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x) {
                double acc = 0.0;
                for (int i = -2; i <= 2; ++i) acc += kKernel[i + 2] * src.at_clamped(x + i, y);
                tmp.at(x, y) = acc;
            }
        Raster smooth(src.width, src.height);
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x) {
                double acc = 0.0;
                for (int i = -2; i <= 2; ++i) acc += kKernel[i + 2] * tmp.at_clamped(x, y + i);
                smooth.at(x, y) = acc;
            }
        Raster down((src.width + 1) / 2, (src.height + 1) / 2);
        for (int y = 0; y < down.height; ++y)
            for (int x = 0; x < down.width; ++x) down.at(x, y) = smooth.at(2 * x, 2 * y);
        pyr.push_back(std::move(down));
    }
    return pyr;
}

namespace {

// gradient by central differences on bilinear samples
inline void sample_gradient(const Raster& img, double x, double y, double& gx, double& gy) {
    gx = (img.bilinear(x + 1.0, y) - img.bilinear(x - 1.0, y)) * 0.5;
    gy = (img.bilinear(x, y + 1.0) - img.bilinear(x, y - 1.0)) * 0.5;
}

struct LkResult {
    Point2 dst;
    bool valid = false;
};

LkResult lk_point(const std::vector<Raster>& prev_pyr, const std::vector<Raster>& next_pyr,
                  const Point2& point, const TrackerParams& params) {
    const int r = params.lk_window / 2;
    const int win_area = params.lk_window * params.lk_window;
    const double min_eig_floor = 1e-4 * win_area;

    double dx = 0.0, dy = 0.0;
    bool fine_valid = false;

    for (int level = static_cast<int>(prev_pyr.size()) - 1; level >= 0; --level) {
        const Raster& I = prev_pyr[level];
        const Raster& J = next_pyr[level];
        const double scale = std::pow(2.0, level);
        const double ux = point.x / scale;
        const double uy = point.y / scale;

        // gradients and template window from the previous frame, fixed per level
        std::vector<double> iw(win_area), gxw(win_area), gyw(win_area);
        double gxx = 0.0, gxy = 0.0, gyy = 0.0;
        int k = 0;
        for (int oy = -r; oy <= r; ++oy)
            for (int ox = -r; ox <= r; ++ox, ++k) {
                const double sx = ux + ox;
                const double sy = uy + oy;
                iw[k] = I.bilinear(sx, sy);
                double gx, gy;
                sample_gradient(I, sx, sy, gx, gy);
                gxw[k] = gx;
                gyw[k] = gy;
                gxx += gx * gx;
                gxy += gx * gy;
                gyy += gy * gy;
            }
        const double trace = gxx + gyy;
        const double det_part = std::sqrt((gxx - gyy) * (gxx - gyy) + 4.0 * gxy * gxy);
        const double min_eig = (trace - det_part) / 2.0;
        if (min_eig < min_eig_floor) {
            if (level == 0) return {};  // near-singular at the finest level
            continue;                   // keep the coarse estimate
        }
        if (level == 0) fine_valid = true;
        const double det = gxx * gyy - gxy * gxy;
        if (det <= 0.0) {
            if (level == 0) return {};
            continue;
        }

        for (int iter = 0; iter < params.lk_iterations; ++iter) {
            double bx = 0.0, by = 0.0;
            k = 0;
            for (int oy = -r; oy <= r; ++oy)
                for (int ox = -r; ox <= r; ++ox, ++k) {
                    const double diff = iw[k] - J.bilinear(ux + dx + ox, uy + dy + oy);
                    bx += diff * gxw[k];
                    by += diff * gyw[k];
                }
            const double step_x = (gyy * bx - gxy * by) / det;
            const double step_y = (gxx * by - gxy * bx) / det;
            dx += step_x;
            dy += step_y;
            if (std::sqrt(step_x * step_x + step_y * step_y) < params.lk_epsilon) break;
        }
        if (level > 0) {
            dx *= 2.0;
            dy *= 2.0;
        }
    }

    LkResult res;
    res.dst = {point.x + dx, point.y + dy};
    res.valid = fine_valid;
    return res;
}

Raster window_patch(const Raster& img, const Point2& center, int window) {
    const int r = window / 2;
    Raster out(window, window);
    for (int oy = -r; oy <= r; ++oy)
        for (int ox = -r; ox <= r; ++ox)
            out.at(ox + r, oy + r) = img.bilinear(center.x + ox, center.y + oy);
    return out;
}

}  // namespace

std::vector<PointMatch> lk_track(const Frame& prev, const Frame& next,
                                 const std::vector<Point2>& points, const TrackerParams& params,
                                 int threads) {
    params.validate();
    if (prev.width() != next.width() || prev.height() != next.height())
        throw std::invalid_argument("lk_track: frame size mismatch");

    const auto prev_pyr = build_pyramid(prev.image(), params.pyramid_levels);
    const auto next_pyr = build_pyramid(next.image(), params.pyramid_levels);

    std::vector<PointMatch> matches(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
        PointMatch& m = matches[i];
        m.src = points[i];
        const LkResult res = lk_point(prev_pyr, next_pyr, points[i], params);
        m.dst = res.dst;
        m.valid = res.valid && res.dst.x >= 0.0 && res.dst.y >= 0.0 &&
                  res.dst.x <= next.width() - 1.0 && res.dst.y <= next.height() - 1.0;
    });
    return matches;
}

std::vector<PointMatch> fb_ncc_filter(const Frame& prev, const Frame& next,
                                      const std::vector<PointMatch>& forward,
                                      const TrackerParams& params, int threads) {
    std::vector<std::size_t> valid_idx;
    std::vector<Point2> endpoints;
    for (std::size_t i = 0; i < forward.size(); ++i)
        if (forward[i].valid) {
            valid_idx.push_back(i);
            endpoints.push_back(forward[i].dst);
        }

    std::vector<PointMatch> out = forward;
    for (auto& m : out) m.valid = false;
    if (valid_idx.empty()) return out;

    const auto backward = lk_track(next, prev, endpoints, params, threads);

    std::vector<double> fb_errors, nccs;
    std::vector<std::size_t> candidates;
    for (std::size_t k = 0; k < valid_idx.size(); ++k) {
        const std::size_t i = valid_idx[k];
        PointMatch& m = out[i];
        if (!backward[k].valid) continue;
        const double ex = backward[k].dst.x - m.src.x;
        const double ey = backward[k].dst.y - m.src.y;
        m.fb_error = std::sqrt(ex * ex + ey * ey);
        m.ncc = ncc(window_patch(prev.image(), m.src, params.lk_window),
                    window_patch(next.image(), m.dst, params.lk_window));
        candidates.push_back(i);
        fb_errors.push_back(m.fb_error);
        nccs.push_back(m.ncc);
    }
    if (candidates.empty()) return out;

    const double fb_med = median(fb_errors);
    const double ncc_med = median(nccs);
    for (std::size_t i : candidates) {
        PointMatch& m = out[i];
        m.valid = m.fb_error <= fb_med && m.ncc >= ncc_med && m.fb_error <= params.fb_max;
    }
    return out;
}

std::vector<Point2> seed_grid_points(const BoundingBox& box, int grid) {
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(grid) * grid);
    for (int gy = 0; gy < grid; ++gy)
        for (int gx = 0; gx < grid; ++gx)
            pts.push_back({box.x + (gx + 0.5) * box.w / grid, box.y + (gy + 0.5) * box.h / grid});
    return pts;
}

BoxMotion estimate_box_motion(const BoundingBox& box, const std::vector<PointMatch>& matches,
                              std::size_t seeded_count) {
    BoxMotion motion;
    std::vector<const PointMatch*> kept;
    for (const auto& m : matches)
        if (m.valid) kept.push_back(&m);
    motion.reliability = seeded_count == 0 ? 0.0 : static_cast<double>(kept.size()) / seeded_count;
    if (kept.size() < 4) return motion;

    std::vector<double> dxs(kept.size()), dys(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        dxs[i] = kept[i]->dst.x - kept[i]->src.x;
        dys[i] = kept[i]->dst.y - kept[i]->src.y;
    }
    motion.dx = median(dxs);
    motion.dy = median(dys);

    std::vector<double> ratios;
    ratios.reserve(kept.size() * (kept.size() - 1) / 2);
    for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = i + 1; j < kept.size(); ++j) {
            const double px = kept[i]->src.x - kept[j]->src.x;
            const double py = kept[i]->src.y - kept[j]->src.y;
            const double qx = kept[i]->dst.x - kept[j]->dst.x;
            const double qy = kept[i]->dst.y - kept[j]->dst.y;
            const double dp = std::sqrt(px * px + py * py);
            if (dp < 1e-9) continue;
            ratios.push_back(std::sqrt(qx * qx + qy * qy) / dp);
        }
    motion.scale = ratios.empty() ? 1.0 : median(ratios);

    motion.box = box.scaled_about_center(motion.scale).translated(motion.dx, motion.dy);
    motion.ok = true;
    return motion;
}

}  // namespace cinetrack
