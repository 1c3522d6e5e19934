#include "cinetrack/learning.hpp"

#include <algorithm>
#include <cmath>

#include "cinetrack/random.hpp"

namespace cinetrack {

namespace {

void train_fern(ObjectModel& model, const NormalizedPatch& patch, bool positive) {
    for (Fern& fern : model.ferns) {
        const int leaf = fern.leaf_index(patch);
        if (positive) ++fern.pos[leaf];
        else ++fern.neg[leaf];
    }
}

void insert_capped(std::vector<NormalizedPatch>& set, NormalizedPatch patch, int cap) {
    set.push_back(std::move(patch));
    if (set.size() > static_cast<std::size_t>(cap)) set.erase(set.begin());
}

// patch sampled under a small similarity transform about the box center
NormalizedPatch warped_patch(const Raster& img, const BoundingBox& box, int side, double scale,
                             double shift_x, double shift_y, double angle_rad) {
    const double cx = box.cx() + shift_x;
    const double cy = box.cy() + shift_y;
    const double ca = std::cos(angle_rad);
    const double sa = std::sin(angle_rad);
    Raster samples(side, side);
    for (int y = 0; y < side; ++y) {
        const double v = ((y + 0.5) / side - 0.5) * box.h * scale;
        for (int x = 0; x < side; ++x) {
            const double u = ((x + 0.5) / side - 0.5) * box.w * scale;
            samples.at(x, y) = img.bilinear(cx + u * ca - v * sa, cy + u * sa + v * ca);
        }
    }
    return resample_normalize(samples, side);
}

}  // namespace

void LearnParams::validate() const {
    if (neg_overlap < 0.0 || pos_overlap > 1.0 || neg_overlap >= pos_overlap)
        throw std::invalid_argument("learning: need 0 <= neg_overlap < pos_overlap <= 1");
    if (core_valid_sim < 0.0 || core_valid_sim > 1.0)
        throw std::invalid_argument("learning: core_valid_sim must be in [0,1]");
    if (max_patches < 10) throw std::invalid_argument("learning: max_patches must be >= 10");
}

ObjectModel init_model(const Frame& first_frame, const BoundingBox& init_box,
                       const ScanGrid& grid, const LearnParams& lp, const DetectorParams& dp) {
    lp.validate();
    dp.validate();
    if (!init_box.in_frame(first_frame.width(), first_frame.height()))
        throw std::invalid_argument("init_model: init box not in frame");
    if (std::min(init_box.w, init_box.h) < dp.min_win)
        throw std::invalid_argument("init_model: init box smaller than min_win");

    const IntegralImage integral(first_frame.image());
    ObjectModel model;
    model.patch_side = dp.patch_side;
    model.ferns = make_ferns(dp);
    model.init_variance = integral.box_variance(init_box);
    if (model.init_variance <= 1e-10)
        throw std::invalid_argument("init_model: initial patch has zero variance");

    // positive set: the init patch plus warped variants
    const NormalizedPatch init_patch =
        normalized_patch_from_box(first_frame.image(), init_box, dp.patch_side);
    model.pos_patches.push_back(init_patch);
    train_fern(model, init_patch, true);

    RandomSource rng(dp.seed ^ 0x9e3779b97f4a7c15ULL);
    constexpr int kWarps = 20;
    constexpr double kDegree = 3.14159265358979323846 / 180.0;
    for (int i = 0; i < kWarps; ++i) {
        const double scale = 1.0 + rng.uniform(-0.05, 0.05);
        const double sx = rng.uniform(-1.0, 1.0);
        const double sy = rng.uniform(-1.0, 1.0);
        const double angle = rng.uniform(-5.0, 5.0) * kDegree;
        NormalizedPatch p =
            warped_patch(first_frame.image(), init_box, dp.patch_side, scale, sx, sy, angle);
        train_fern(model, p, true);
        insert_capped(model.pos_patches, std::move(p), lp.max_patches);
    }

    // negatives: the highest-variance grid boxes away from the target; on
    // structureless backgrounds these are plain background patches, which is
    // exactly what the NN stage needs to reject empty scenes
    std::vector<std::pair<double, std::size_t>> negatives;  // (variance, grid index)
    for (std::size_t i = 0; i < grid.boxes.size(); ++i) {
        const BoundingBox& box = grid.boxes[i];
        if (iou(box, init_box) >= lp.neg_overlap) continue;
        negatives.emplace_back(integral.box_variance(box), i);
    }
    std::stable_sort(negatives.begin(), negatives.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t fern_count = std::min<std::size_t>(negatives.size(), 100);
    const std::size_t patch_count = std::min<std::size_t>(negatives.size(), 10);
    for (std::size_t k = 0; k < fern_count; ++k) {
        NormalizedPatch p = normalized_patch_from_box(first_frame.image(),
                                                      grid.boxes[negatives[k].second],
                                                      dp.patch_side);
        train_fern(model, p, false);
        if (k < patch_count) insert_capped(model.neg_patches, std::move(p), lp.max_patches);
    }

    // boxes adjacent to the target teach the model what this neighborhood
    // looks like without the target (out-of-plane disappearance)
    for (const auto& [ox, oy] :
         std::initializer_list<std::pair<double, double>>{{-init_box.w, 0.0},
                                                          {init_box.w, 0.0},
                                                          {0.0, -init_box.h},
                                                          {0.0, init_box.h},
                                                          {-init_box.w, -init_box.h},
                                                          {init_box.w, init_box.h},
                                                          {-init_box.w, init_box.h},
                                                          {init_box.w, -init_box.h}}) {
        const BoundingBox neighbor = init_box.translated(ox, oy);
        if (!neighbor.in_frame(first_frame.width(), first_frame.height())) continue;
        if (iou(neighbor, init_box) >= lp.neg_overlap) continue;
        NormalizedPatch p =
            normalized_patch_from_box(first_frame.image(), neighbor, dp.patch_side);
        train_fern(model, p, false);
        insert_capped(model.neg_patches, std::move(p), lp.max_patches);
    }
    return model;
}

void p_expert(const Frame& frame, const BoundingBox& trusted_box, const ScanGrid& grid,
              ObjectModel& model, const LearnParams& lp) {
    std::vector<std::pair<double, std::size_t>> overlaps;
    for (std::size_t i = 0; i < grid.boxes.size(); ++i) {
        const double v = iou(grid.boxes[i], trusted_box);
        if (v >= lp.pos_overlap) overlaps.emplace_back(v, i);
    }
    std::stable_sort(overlaps.begin(), overlaps.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t count = std::min<std::size_t>(overlaps.size(), 10);
    for (std::size_t k = 0; k < count; ++k)
        train_fern(model,
                   normalized_patch_from_box(frame.image(), grid.boxes[overlaps[k].second],
                                             model.patch_side),
                   true);

    NormalizedPatch trusted =
        normalized_patch_from_box(frame.image(), trusted_box, model.patch_side);
    if (nn_similarity(trusted, model) < 1.0)
        insert_capped(model.pos_patches, std::move(trusted), lp.max_patches);
}

void n_expert(const Frame& frame, const BoundingBox& trusted_box,
              const std::vector<BoundingBox>& fern_survivors, ObjectModel& model,
              const LearnParams& lp) {
    // confidence judged against the pre-update snapshot, then all updates
    // applied; within-frame ordering must not change what gets stored
    std::vector<NormalizedPatch> patches;
    double best_posterior = -1.0;
    std::size_t best_index = 0;
    for (const BoundingBox& box : fern_survivors) {
        if (iou(box, trusted_box) >= lp.neg_overlap) continue;
        NormalizedPatch p = normalized_patch_from_box(frame.image(), box, model.patch_side);
        const double posterior = fern_posterior(p, model);
        if (posterior > best_posterior) {
            best_posterior = posterior;
            best_index = patches.size();
        }
        patches.push_back(std::move(p));
    }
    for (const NormalizedPatch& p : patches) train_fern(model, p, false);
    if (!patches.empty())
        insert_capped(model.neg_patches, std::move(patches[best_index]), lp.max_patches);
}

}  // namespace cinetrack
