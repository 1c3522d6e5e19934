#pragma once

#include <vector>

#include "cinetrack/imaging.hpp"

namespace cinetrack {

struct TrackerParams {
    int pyramid_levels = 3;
    int lk_window = 31;      // odd
    int lk_iterations = 30;
    double lk_epsilon = 0.01;  // px
    int grid = 10;             // points per axis
    double fb_max = 10.0;      // px

    void validate() const;
};

struct PointMatch {
    Point2 src;
    Point2 dst;
    double fb_error = 0.0;
    double ncc = 0.0;
    bool valid = false;
};

/// Image pyramid: level 0 is the input, each level above is binomially
/// smoothed and decimated 2x.
std::vector<Raster> build_pyramid(const Raster& img, int levels);

/// Pyramidal Lucas-Kanade, coarse to fine. Returns one match per input point;
/// matches whose spatial-gradient matrix is near-singular at the finest level
/// (min eigenvalue < 1e-4 of the window area) or whose endpoint leaves the
/// frame are flagged invalid. Point solves are independent, so results do not
/// depend on the thread count.
std::vector<PointMatch> lk_track(const Frame& prev, const Frame& next,
                                 const std::vector<Point2>& points, const TrackerParams& params,
                                 int threads = 1);

/// Forward-backward + NCC filtering: backtrack each endpoint, keep points with
/// fb_error <= median(fb) and ncc >= median(ncc), drop fb_error > fb_max.
std::vector<PointMatch> fb_ncc_filter(const Frame& prev, const Frame& next,
                                      const std::vector<PointMatch>& forward,
                                      const TrackerParams& params, int threads = 1);

struct BoxMotion {
    bool ok = false;
    double dx = 0.0;
    double dy = 0.0;
    double scale = 1.0;
    double reliability = 0.0;  // retained / seeded
    BoundingBox box;           // transformed box (valid when ok)
};

/// Median displacement + pairwise-distance-ratio median scale over the
/// retained matches. Fails with fewer than 4 retained points.
BoxMotion estimate_box_motion(const BoundingBox& box, const std::vector<PointMatch>& matches,
                              std::size_t seeded_count);

/// grid x grid cell-center lattice inside the box.
std::vector<Point2> seed_grid_points(const BoundingBox& box, int grid);

}  // namespace cinetrack
