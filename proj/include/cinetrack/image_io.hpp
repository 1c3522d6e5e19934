#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cinetrack/imaging.hpp"

namespace cinetrack {

/// 8-bit grayscale image as stored on disk.
struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

Image8 read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Image8& img);

// Minimal PNG support: 8-bit grayscale, non-interlaced. Enough for masks and
// sequence frames; anything else is rejected.
Image8 read_png_gray8(const std::string& path);
void write_png_gray8(const std::string& path, const Image8& img);

/// Reads either format based on the file extension.
Image8 read_gray8(const std::string& path);

Image8 to_image8(const Raster& r);      // round(v*255), clamped
Raster to_raster(const Image8& img);    // v / 255

}  // namespace cinetrack
