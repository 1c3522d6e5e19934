#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cinetrack/imaging.hpp"

namespace cinetrack {

struct DetectorParams {
    int min_win = 12;           // px, smallest scan window side
    double scale_step = 1.1;
    double shift_frac = 0.1;    // window shift as a fraction of the window side
    double var_frac = 0.5;      // min variance fraction of the initial patch variance
    int n_ferns = 10;
    int fern_features = 13;     // comparisons per fern
    double fern_threshold = 0.5;
    double nn_threshold = 0.6;
    int region_side = 30;       // px
    int region_history = 3;     // frames feeding the region centroid
    int patch_side = 12;        // normalized patch side
    std::uint64_t seed = 42;    // fern geometry / model init randomness

    void validate() const;
};

/// All candidate windows over every scale, plus the scale count for the grid.
struct ScanGrid {
    std::vector<BoundingBox> boxes;
    int n_scales = 0;
};

/// Summed-area tables for O(1) box mean/variance.
class IntegralImage {
public:
    explicit IntegralImage(const Raster& img);

    /// Sum over the integer box [x, x+w) x [y, y+h).
    double box_sum(int x, int y, int w, int h) const;
    double box_sum_sq(int x, int y, int w, int h) const;
    /// Population variance of the box samples.
    double box_variance(int x, int y, int w, int h) const;
    /// Variance of the box rounded to the pixel grid; 0 for degenerate boxes.
    double box_variance(const BoundingBox& box) const;

    int width() const { return width_; }
    int height() const { return height_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> sum_;     // (w+1)*(h+1)
    std::vector<double> sum_sq_;
};

/// One fern: a fixed set of pixel-pair comparisons in normalized-patch space
/// plus per-leaf positive/negative counts.
struct Fern {
    std::vector<std::pair<int, int>> comparisons;
    std::vector<std::uint32_t> pos;
    std::vector<std::uint32_t> neg;

    int leaf_index(const NormalizedPatch& patch) const;
};

/// Online appearance model: fern ensemble + nearest-neighbor patch sets.
struct ObjectModel {
    std::vector<Fern> ferns;
    std::vector<NormalizedPatch> pos_patches;
    std::vector<NormalizedPatch> neg_patches;
    double init_variance = 0.0;
    int patch_side = 12;

    bool initialized() const { return !pos_patches.empty(); }
};

struct SearchRegion {
    double cx = 0.0;
    double cy = 0.0;
    double side = 0.0;
    bool active = false;

    bool contains(double x, double y) const {
        return active && x >= cx - side / 2.0 && x <= cx + side / 2.0 && y >= cy - side / 2.0 &&
               y <= cy + side / 2.0;
    }
};

struct Detection {
    BoundingBox box;
    double similarity = 0.0;
};

/// Sliding windows at scales init_size * scale_step^k spanning
/// [min_win, frame side], shifted by shift_frac of the window side.
ScanGrid build_scan_grid(int frame_w, int frame_h, const BoundingBox& init_box,
                         const DetectorParams& params);

/// New fern ensemble with seeded random comparison geometry.
std::vector<Fern> make_ferns(const DetectorParams& params);

/// Centroid of up to the last region_history valid centers; inactive when the
/// center list is empty (detector then scans globally). Active regions are
/// clamped fully in-frame.
SearchRegion update_search_region(const std::vector<Point2>& recent_centers, int frame_w,
                                  int frame_h, const DetectorParams& params);

/// True iff the box variance reaches var_frac of the model's initial variance.
bool variance_pass(const IntegralImage& integral, const BoundingBox& box,
                   const ObjectModel& model, const DetectorParams& params);

/// Mean over ferns of the leaf posterior p/(p+n); empty leaves count 0.
double fern_posterior(const NormalizedPatch& patch, const ObjectModel& model);

/// Relative similarity in [0,1] from nearest-neighbor NCC distances:
/// (1-S-) / ((1-S+) + (1-S-)) with S+- the best (NCC+1)/2 over the
/// positive/negative patch sets (S- = 0 when no negatives are stored).
double nn_similarity(const NormalizedPatch& patch, const ObjectModel& model);

struct DetectOutput {
    std::vector<Detection> clusters;           // sorted by similarity, descending
    std::vector<BoundingBox> fern_survivors;   // passed variance + fern stages
    std::size_t candidates_evaluated = 0;
};

/// Variance -> fern -> NN cascade over grid boxes whose centers lie in the
/// region (all boxes when inactive), followed by IoU >= 0.5 clustering.
DetectOutput detect(const Frame& frame, const IntegralImage& integral, const ScanGrid& grid,
                    const ObjectModel& model, const SearchRegion& region,
                    const DetectorParams& params, int threads = 1);

}  // namespace cinetrack
