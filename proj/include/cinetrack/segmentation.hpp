#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cinetrack/imaging.hpp"

namespace cinetrack {

/// Binary mask, same dimensions as the source frame. 1 = inside.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    Mask() = default;
    Mask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }

    std::size_t area() const;
    /// Centroid of inside pixels (pixel coordinates); (0,0) when empty.
    std::pair<double, double> centroid() const;
};

struct CvParams {
    double mu = 0.05;       // contour-length weight
    double nu = 0.0;        // area weight
    double lambda1 = 2.5;   // inside fit weight
    double lambda2 = 1.0;   // outside fit weight
    int max_iters = 20;     // sweep cap
    double tol = 0.001;     // changed fraction of the window below which we stop
    int band = 10;          // px dilation of the working window around the box

    void validate() const;
};

struct SegResult {
    Mask mask;
    double energy = 0.0;
    int iters_used = 0;
    double c1 = 0.0;  // mean intensity inside
    double c2 = 0.0;  // mean intensity outside
    bool degenerate = false;
};

/// Filled ellipse inscribed in the box, clipped to the frame.
Mask init_mask(const BoundingBox& box, int frame_w, int frame_h);

/// Two-phase piecewise-constant energy of a mask over the full frame:
/// mu*Perimeter + nu*Area + l1*sum_in (I-c1)^2 + l2*sum_out (I-c2)^2,
/// perimeter counted as 4-neighbor boundary pixel pairs.
double energy(const Frame& frame, const Mask& mask, const CvParams& params);

/// One raster-order sweep over the working window, flipping labels whose
/// single-flip energy delta is negative. Returns the new mask and the number
/// of changed pixels. window empty -> whole frame.
struct SweepWindow {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
};
std::pair<Mask, int> cv_sweep(const Frame& frame, const Mask& mask, const CvParams& params,
                              std::optional<SweepWindow> window = std::nullopt);

/// Full per-frame segmentation: seed from the previous mask translated to the
/// tracked center (or the init box on the first frame), restrict sweeps to the
/// tracked box dilated by band px, iterate to tolerance.
SegResult segment_frame(const Frame& frame, double tracked_cx, double tracked_cy,
                        const std::optional<Mask>& prev_mask, const BoundingBox& tracked_box,
                        const CvParams& params);

}  // namespace cinetrack
