#include "cinetrack/detector.hpp"

#include <algorithm>
#include <cmath>

#include "cinetrack/parallel.hpp"
#include "cinetrack/random.hpp"

namespace cinetrack {

void DetectorParams::validate() const {
    if (min_win < 4) throw std::invalid_argument("detector: min_win must be >= 4");
    if (scale_step <= 1.0) throw std::invalid_argument("detector: scale_step must be > 1");
    if (shift_frac <= 0.0) throw std::invalid_argument("detector: shift_frac must be positive");
    if (var_frac <= 0.0 || var_frac > 1.0)
        throw std::invalid_argument("detector: var_frac must be in (0,1]");
    if (n_ferns < 1 || fern_features < 1 || fern_features > 16)
        throw std::invalid_argument("detector: bad fern configuration");
    if (region_side <= 0) throw std::invalid_argument("detector: region_side must be positive");
    if (region_history < 1)
        throw std::invalid_argument("detector: region_history must be >= 1");
    if (patch_side < 4) throw std::invalid_argument("detector: patch_side must be >= 4");
}

ScanGrid build_scan_grid(int frame_w, int frame_h, const BoundingBox& init_box,
                         const DetectorParams& params) {
    params.validate();
    if (!init_box.valid() || !init_box.in_frame(frame_w, frame_h))
        throw std::invalid_argument("build_scan_grid: init box not in frame");
    if (std::min(init_box.w, init_box.h) < params.min_win)
        throw std::invalid_argument("build_scan_grid: init box smaller than min_win");

    // scale exponents keeping both sides within [min_win, frame side]
    int k_up = 0;
    while (init_box.w * std::pow(params.scale_step, k_up + 1) <= frame_w &&
           init_box.h * std::pow(params.scale_step, k_up + 1) <= frame_h)
        ++k_up;
    int k_down = 0;
    while (std::min(init_box.w, init_box.h) * std::pow(params.scale_step, -(k_down + 1)) >=
           params.min_win)
        ++k_down;

    ScanGrid grid;
    grid.n_scales = k_up + k_down + 1;
    std::vector<std::pair<int, int>> seen_sizes;
    for (int k = -k_down; k <= k_up; ++k) {
        const double s = std::pow(params.scale_step, k);
        const int w = round_px(init_box.w * s);
        const int h = round_px(init_box.h * s);
        if (w > frame_w || h > frame_h || w < 1 || h < 1) continue;
        // rounding can collide adjacent scales at small sizes
        if (std::find(seen_sizes.begin(), seen_sizes.end(), std::make_pair(w, h)) !=
            seen_sizes.end())
            continue;
        seen_sizes.emplace_back(w, h);
        const int shift = std::max(1, round_px(params.shift_frac * std::min(w, h)));
        for (int y = 0; y + h <= frame_h; y += shift)
            for (int x = 0; x + w <= frame_w; x += shift)
                grid.boxes.push_back({static_cast<double>(x), static_cast<double>(y),
                                      static_cast<double>(w), static_cast<double>(h)});
    }
    return grid;
}

IntegralImage::IntegralImage(const Raster& img) : width_(img.width), height_(img.height) {
    const std::size_t stride = width_ + 1;
    sum_.assign(stride * (height_ + 1), 0.0);
    sum_sq_.assign(stride * (height_ + 1), 0.0);
    for (int y = 0; y < height_; ++y) {
        double row = 0.0, row_sq = 0.0;
        for (int x = 0; x < width_; ++x) {
            const double v = img.at(x, y);
            row += v;
            row_sq += v * v;
            sum_[(y + 1) * stride + x + 1] = sum_[y * stride + x + 1] + row;
            sum_sq_[(y + 1) * stride + x + 1] = sum_sq_[y * stride + x + 1] + row_sq;
        }
    }
}

double IntegralImage::box_sum(int x, int y, int w, int h) const {
    const std::size_t stride = width_ + 1;
    return sum_[(y + h) * stride + x + w] - sum_[y * stride + x + w] -
           sum_[(y + h) * stride + x] + sum_[y * stride + x];
}

double IntegralImage::box_sum_sq(int x, int y, int w, int h) const {
    const std::size_t stride = width_ + 1;
    return sum_sq_[(y + h) * stride + x + w] - sum_sq_[y * stride + x + w] -
           sum_sq_[(y + h) * stride + x] + sum_sq_[y * stride + x];
}

double IntegralImage::box_variance(int x, int y, int w, int h) const {
    const double n = static_cast<double>(w) * h;
    const double mean = box_sum(x, y, w, h) / n;
    const double var = box_sum_sq(x, y, w, h) / n - mean * mean;
    return var > 0.0 ? var : 0.0;
}

double IntegralImage::box_variance(const BoundingBox& box) const {
    int x = round_px(box.x), y = round_px(box.y), w = round_px(box.w), h = round_px(box.h);
    x = std::clamp(x, 0, width_);
    y = std::clamp(y, 0, height_);
    w = std::clamp(w, 0, width_ - x);
    h = std::clamp(h, 0, height_ - y);
    if (w < 1 || h < 1) return 0.0;
    return box_variance(x, y, w, h);
}

int Fern::leaf_index(const NormalizedPatch& patch) const {
    int index = 0;
    for (const auto& [a, b] : comparisons)
        index = (index << 1) | (patch.values[a] > patch.values[b] ? 1 : 0);
    return index;
}

std::vector<Fern> make_ferns(const DetectorParams& params) {
    RandomSource rng(params.seed);
    const int n_px = params.patch_side * params.patch_side;
    const std::size_t n_leaves = std::size_t{1} << params.fern_features;
    std::vector<Fern> ferns(params.n_ferns);
    for (auto& fern : ferns) {
        fern.pos.assign(n_leaves, 0);
        fern.neg.assign(n_leaves, 0);
        fern.comparisons.reserve(params.fern_features);
        for (int f = 0; f < params.fern_features; ++f) {
            const int a = static_cast<int>(rng.uniform_index(n_px));
            int b = static_cast<int>(rng.uniform_index(n_px));
            while (b == a) b = static_cast<int>(rng.uniform_index(n_px));
            fern.comparisons.emplace_back(a, b);
        }
    }
    return ferns;
}

SearchRegion update_search_region(const std::vector<Point2>& recent_centers, int frame_w,
                                  int frame_h, const DetectorParams& params) {
    SearchRegion region;
    if (recent_centers.empty()) return region;

    const std::size_t use = std::min<std::size_t>(recent_centers.size(), params.region_history);
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = recent_centers.size() - use; i < recent_centers.size(); ++i) {
        cx += recent_centers[i].x;
        cy += recent_centers[i].y;
    }
    cx /= use;
    cy /= use;

    const double half = params.region_side / 2.0;
    // clamp the region rectangle in-frame (sliding, not shrinking)
    if (params.region_side <= frame_w) cx = std::clamp(cx, half, frame_w - half);
    else cx = frame_w / 2.0;
    if (params.region_side <= frame_h) cy = std::clamp(cy, half, frame_h - half);
    else cy = frame_h / 2.0;

    region.cx = cx;
    region.cy = cy;
    region.side = params.region_side;
    region.active = true;
    return region;
}

bool variance_pass(const IntegralImage& integral, const BoundingBox& box,
                   const ObjectModel& model, const DetectorParams& params) {
    return integral.box_variance(box) >= params.var_frac * model.init_variance;
}

double fern_posterior(const NormalizedPatch& patch, const ObjectModel& model) {
    if (model.ferns.empty()) throw std::logic_error("fern_posterior: model not initialized");
    double sum = 0.0;
    for (const Fern& fern : model.ferns) {
        const int leaf = fern.leaf_index(patch);
        const double p = fern.pos[leaf];
        const double n = fern.neg[leaf];
        if (p + n > 0.0) sum += p / (p + n);
    }
    return sum / model.ferns.size();
}

double nn_similarity(const NormalizedPatch& patch, const ObjectModel& model) {
    if (model.pos_patches.empty())
        throw std::logic_error("nn_similarity: positive patch set is empty");
    double s_pos = 0.0;
    for (const auto& p : model.pos_patches)
        s_pos = std::max(s_pos, (ncc(patch, p) + 1.0) / 2.0);
    double s_neg = 0.0;
    for (const auto& p : model.neg_patches)
        s_neg = std::max(s_neg, (ncc(patch, p) + 1.0) / 2.0);

    const double d_pos = 1.0 - s_pos;
    const double d_neg = 1.0 - s_neg;
    if (d_pos + d_neg <= 0.0) return 0.5;  // exact hit in both sets
    return d_neg / (d_pos + d_neg);
}

DetectOutput detect(const Frame& frame, const IntegralImage& integral, const ScanGrid& grid,
                    const ObjectModel& model, const SearchRegion& region,
                    const DetectorParams& params, int threads) {
    if (!model.initialized()) throw std::logic_error("detect: model not initialized");

    std::vector<std::size_t> candidates;
    candidates.reserve(grid.boxes.size());
    for (std::size_t i = 0; i < grid.boxes.size(); ++i) {
        const BoundingBox& b = grid.boxes[i];
        if (!region.active || region.contains(b.cx(), b.cy())) candidates.push_back(i);
    }

    DetectOutput out;
    out.candidates_evaluated = candidates.size();

    // cascade against a read-only model snapshot; each slot written once
    struct Stage {
        std::uint8_t fern_pass = 0;
        std::uint8_t nn_pass = 0;
        double similarity = 0.0;
    };
    std::vector<Stage> stages(candidates.size());
    parallel_for(candidates.size(), threads, [&](std::size_t k) {
        const BoundingBox& box = grid.boxes[candidates[k]];
        if (!variance_pass(integral, box, model, params)) return;
        const NormalizedPatch patch =
            normalized_patch_from_box(frame.image(), box, model.patch_side);
        if (fern_posterior(patch, model) < params.fern_threshold) return;
        stages[k].fern_pass = 1;
        const double sim = nn_similarity(patch, model);
        if (sim < params.nn_threshold) return;
        stages[k].nn_pass = 1;
        stages[k].similarity = sim;
    });

    std::vector<Detection> survivors;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (stages[k].fern_pass) out.fern_survivors.push_back(grid.boxes[candidates[k]]);
        if (stages[k].nn_pass)
            survivors.push_back({grid.boxes[candidates[k]], stages[k].similarity});
    }

    // greedy IoU clustering, highest similarity first
    std::vector<std::size_t> order(survivors.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return survivors[a].similarity > survivors[b].similarity;
    });
    std::vector<bool> assigned(survivors.size(), false);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t seed_idx = order[oi];
        if (assigned[seed_idx]) continue;
        assigned[seed_idx] = true;
        // similarity-weighted mean centers the cluster on the response peak
        // instead of the survivor footprint
        double w_sum = survivors[seed_idx].similarity;
        BoundingBox mean_box = survivors[seed_idx].box;
        mean_box.x *= w_sum;
        mean_box.y *= w_sum;
        mean_box.w *= w_sum;
        mean_box.h *= w_sum;
        double best_sim = survivors[seed_idx].similarity;
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (assigned[j]) continue;
            if (iou(survivors[seed_idx].box, survivors[j].box) < 0.5) continue;
            assigned[j] = true;
            const double w = survivors[j].similarity;
            mean_box.x += w * survivors[j].box.x;
            mean_box.y += w * survivors[j].box.y;
            mean_box.w += w * survivors[j].box.w;
            mean_box.h += w * survivors[j].box.h;
            best_sim = std::max(best_sim, survivors[j].similarity);
            w_sum += w;
        }
        mean_box.x /= w_sum;
        mean_box.y /= w_sum;
        mean_box.w /= w_sum;
        mean_box.h /= w_sum;
        out.clusters.push_back({mean_box, best_sim});
    }
    std::stable_sort(out.clusters.begin(), out.clusters.end(),
                     [](const Detection& a, const Detection& b) {
                         return a.similarity > b.similarity;
                     });
    return out;
}

}  // namespace cinetrack
