#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cinetrack {

/// Row-major grayscale raster. Frames hold luminance in [0,1]; intermediate
/// buffers (pyramid levels, patches, residuals) may hold anything.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Raster() = default;
    Raster(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("Raster: non-positive dimensions");
    }

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    double at_clamped(int x, int y) const {
        x = x < 0 ? 0 : (x >= width ? width - 1 : x);
        y = y < 0 ? 0 : (y >= height ? height - 1 : y);
        return at(x, y);
    }

    /// Bilinear sample at real coordinates; integer coordinates address pixel
    /// centers. Samples outside the raster clamp to the border.
    double bilinear(double x, double y) const;

    bool empty() const { return data.empty(); }
    std::size_t size() const { return data.size(); }
};

struct Spacing {
    double x_mm = 1.0;
    double y_mm = 1.0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// One cine frame: validated raster plus physical metadata.
/// Immutable after construction; all invariants checked here.
class Frame {
public:
    Frame(Raster image, Spacing spacing, int index = 0, double timestamp = 0.0);

    const Raster& image() const { return image_; }
    int width() const { return image_.width; }
    int height() const { return image_.height; }
    Spacing spacing() const { return spacing_; }
    int index() const { return index_; }
    double timestamp() const { return timestamp_; }

private:
    Raster image_;
    Spacing spacing_;
    int index_;
    double timestamp_;
};

struct Sequence {
    std::vector<Frame> frames;
    double fps = 0.0;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
};

/// Checks cross-frame invariants (contiguous indices, shared geometry, fps>0).
void validate_sequence(const Sequence& seq);

/// Axis-aligned box, real-valued top-left corner and extents in pixels.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }
    bool valid() const { return w > 0.0 && h > 0.0; }
    bool in_frame(int frame_w, int frame_h) const {
        return x >= 0.0 && y >= 0.0 && x + w <= frame_w && y + h <= frame_h;
    }
    BoundingBox scaled_about_center(double s) const {
        return {cx() - w * s / 2.0, cy() - h * s / 2.0, w * s, h * s};
    }
    BoundingBox translated(double dx, double dy) const { return {x + dx, y + dy, w, h}; }
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// Square zero-mean patch used by the appearance model.
struct NormalizedPatch {
    int side = 0;
    std::vector<double> values;  // side*side, mean 0
};

/// Half-up rounding used whenever a real box is snapped to the pixel grid.
inline int round_px(double v) { return static_cast<int>(std::floor(v + 0.5)); }

/// Integer-grid crop. The box is rounded half-up to the grid first and must be
/// in-frame after rounding.
Raster crop_patch(const Frame& frame, const BoundingBox& box);

/// Bilinear resample of an arbitrary box region to out_w x out_h samples.
Raster sample_box(const Raster& img, const BoundingBox& box, int out_w, int out_h);

/// Bilinear resample to side x side followed by mean subtraction.
NormalizedPatch resample_normalize(const Raster& patch, int side);

/// Patch for an arbitrary (possibly fractional) box, resampled to side x side
/// and mean-subtracted. Equivalent to resample_normalize(sample_box(...)).
NormalizedPatch normalized_patch_from_box(const Raster& img, const BoundingBox& box, int side);

/// Cosine similarity of two zero-mean patches, in [-1,1]; 0 if either is flat.
double ncc(const NormalizedPatch& a, const NormalizedPatch& b);

/// Zero-mean NCC of two equal-sized rasters, in [-1,1]; 0 if either is flat.
double ncc(const Raster& a, const Raster& b);

/// Loads NNNN.pgm / NNNN.png frames plus meta.json from a directory.
Sequence load_sequence(const std::string& dir);

}  // namespace cinetrack
