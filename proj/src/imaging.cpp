#include "cinetrack/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "cinetrack/image_io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace cinetrack {

double Raster::bilinear(double x, double y) const {
    // clamp so the 2x2 support stays inside the raster
    if (x < 0.0) x = 0.0;
    if (y < 0.0) y = 0.0;
    if (x > width - 1.0) x = width - 1.0;
    if (y > height - 1.0) y = height - 1.0;
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = x0 + 1 < width ? x0 + 1 : x0;
    const int y1 = y0 + 1 < height ? y0 + 1 : y0;
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    const double bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

Frame::Frame(Raster image, Spacing spacing, int index, double timestamp)
    : image_(std::move(image)), spacing_(spacing), index_(index), timestamp_(timestamp) {
    if (image_.width < 16 || image_.height < 16)
        throw std::invalid_argument("Frame: dimensions must be at least 16x16");
    if (image_.data.size() != static_cast<std::size_t>(image_.width) * image_.height)
        throw std::invalid_argument("Frame: pixel count does not match dimensions");
    if (spacing_.x_mm <= 0.0 || spacing_.y_mm <= 0.0)
        throw std::invalid_argument("Frame: spacing must be positive");
    for (double v : image_.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("Frame: pixel value outside [0,1]");
}

void validate_sequence(const Sequence& seq) {
    if (seq.fps <= 0.0) throw std::invalid_argument("Sequence: fps must be positive");
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const Frame& f = seq.frames[i];
        if (f.index() != static_cast<int>(i))
            throw std::invalid_argument("Sequence: frame indices must be contiguous from 0");
        if (f.width() != seq.frames[0].width() || f.height() != seq.frames[0].height())
            throw std::invalid_argument("Sequence: frames differ in size");
        if (f.spacing().x_mm != seq.frames[0].spacing().x_mm ||
            f.spacing().y_mm != seq.frames[0].spacing().y_mm)
            throw std::invalid_argument("Sequence: frames differ in spacing");
    }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double x0 = std::max(a.x, b.x);
    const double y0 = std::max(a.y, b.y);
    const double x1 = std::min(a.x + a.w, b.x + b.w);
    const double y1 = std::min(a.y + a.h, b.y + b.h);
    if (x1 <= x0 || y1 <= y0) return 0.0;
    const double inter = (x1 - x0) * (y1 - y0);
    return inter / (a.area() + b.area() - inter);
}

Raster crop_patch(const Frame& frame, const BoundingBox& box) {
    if (!box.valid()) throw std::invalid_argument("crop_patch: empty box");
    const int x0 = round_px(box.x);
    const int y0 = round_px(box.y);
    const int w = round_px(box.w);
    const int h = round_px(box.h);
    if (w <= 0 || h <= 0 || x0 < 0 || y0 < 0 || x0 + w > frame.width() || y0 + h > frame.height())
        throw std::invalid_argument("crop_patch: box out of frame after rounding");
    Raster out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = frame.image().at(x0 + x, y0 + y);
    return out;
}

Raster sample_box(const Raster& img, const BoundingBox& box, int out_w, int out_h) {
    if (!box.valid()) throw std::invalid_argument("sample_box: empty box");
    if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("sample_box: empty output");
    Raster out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const double sy = box.y + (y + 0.5) * box.h / out_h - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double sx = box.x + (x + 0.5) * box.w / out_w - 0.5;
            out.at(x, y) = img.bilinear(sx, sy);
        }
    }
    return out;
}

NormalizedPatch resample_normalize(const Raster& patch, int side) {
    return normalized_patch_from_box(patch, {0.0, 0.0, static_cast<double>(patch.width),
                                             static_cast<double>(patch.height)},
                                     side);
}

NormalizedPatch normalized_patch_from_box(const Raster& img, const BoundingBox& box, int side) {
    if (side < 4) throw std::invalid_argument("normalized patch side must be >= 4");
    if (img.empty()) throw std::invalid_argument("normalized patch: empty source");
    Raster s = sample_box(img, box, side, side);
    const double mean = std::accumulate(s.data.begin(), s.data.end(), 0.0) / s.data.size();
    NormalizedPatch p;
    p.side = side;
    p.values.resize(s.data.size());
    for (std::size_t i = 0; i < s.data.size(); ++i) p.values[i] = s.data[i] - mean;
    return p;
}

double ncc(const NormalizedPatch& a, const NormalizedPatch& b) {
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("ncc: patch size mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

double ncc(const Raster& a, const Raster& b) {
    if (a.data.size() != b.data.size()) throw std::invalid_argument("ncc: size mismatch");
    const double n = static_cast<double>(a.data.size());
    const double ma = std::accumulate(a.data.begin(), a.data.end(), 0.0) / n;
    const double mb = std::accumulate(b.data.begin(), b.data.end(), 0.0) / n;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double da = a.data[i] - ma;
        const double db = b.data[i] - mb;
        dot += da * db;
        na += da * da;
        nb += db * db;
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

namespace {

bool parse_frame_number(const std::string& stem, int& number) {
    if (stem.size() != 4) return false;
    for (char c : stem)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    number = std::stoi(stem);
    return true;
}

}  // namespace

Sequence load_sequence(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::is_directory(root))
        throw std::runtime_error("load_sequence: not a directory: " + dir);

    const fs::path meta_path = root / "meta.json";
    if (!fs::exists(meta_path))
        throw std::runtime_error("load_sequence: missing meta.json in " + dir);
    std::ifstream meta_in(meta_path);
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_sequence: bad meta.json: " + std::string(e.what()));
    }
    for (const char* key : {"spacing_mm_x", "spacing_mm_y", "fps"})
        if (!meta.contains(key) || !meta[key].is_number())
            throw std::runtime_error(std::string("load_sequence: meta.json missing numeric key ") + key);
    Spacing spacing{meta["spacing_mm_x"].get<double>(), meta["spacing_mm_y"].get<double>()};
    const double fps = meta["fps"].get<double>();
    if (spacing.x_mm <= 0.0 || spacing.y_mm <= 0.0 || fps <= 0.0)
        throw std::runtime_error("load_sequence: meta.json values must be positive");

    std::vector<std::pair<int, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const fs::path p = entry.path();
        const std::string ext = p.extension().string();
        if (ext != ".pgm" && ext != ".png") continue;
        const std::string stem = p.stem().string();
        int number = 0;
        if (!parse_frame_number(stem, number)) continue;
        files.emplace_back(number, p);
    }
    if (files.empty())
        throw std::runtime_error("load_sequence: no NNNN.pgm/NNNN.png frames in " + dir);
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    Sequence seq;
    seq.fps = fps;
    int expect = 0;
    int w0 = 0, h0 = 0;
    for (const auto& [number, path] : files) {
        if (number != expect)
            throw std::runtime_error("load_sequence: non-contiguous frame number at " +
                                     path.filename().string());
        Image8 img = read_gray8(path.string());
        if (expect == 0) {
            w0 = img.width;
            h0 = img.height;
        } else if (img.width != w0 || img.height != h0) {
            throw std::runtime_error("load_sequence: dimension mismatch at " +
                                     path.filename().string());
        }
        seq.frames.emplace_back(to_raster(img), spacing, expect, expect / fps);
        ++expect;
    }
    validate_sequence(seq);
    return seq;
}

}  // namespace cinetrack
