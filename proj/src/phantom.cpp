#include "cinetrack/phantom.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cinetrack/image_io.hpp"
#include "cinetrack/random.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace cinetrack {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string frame_name(int index, const char* prefix, const char* ext) {
    std::ostringstream os;
    os << prefix << std::setw(4) << std::setfill('0') << index << ext;
    return os.str();
}

struct BackgroundField {
    double fx, fy, f2, phase1, phase2, phase3;

    static BackgroundField draw(RandomSource& rng) {
        BackgroundField b{};
        b.fx = rng.uniform(0.6, 1.8);
        b.fy = rng.uniform(0.6, 1.8);
        b.f2 = rng.uniform(0.4, 1.2);
        b.phase1 = rng.uniform(0.0, 2.0 * kPi);
        b.phase2 = rng.uniform(0.0, 2.0 * kPi);
        b.phase3 = rng.uniform(0.0, 2.0 * kPi);
        return b;
    }

    double at(double x, double y, int w, int h) const {
        return 0.60 + 0.12 * std::sin(2.0 * kPi * x * fx / w + phase1) *
                           std::cos(2.0 * kPi * y * fy / h + phase2) +
               0.06 * std::sin(2.0 * kPi * (x + y) * f2 / w + phase3);
    }
};

// Logistic edge profile of an ellipse: 0.5 exactly on the ellipse, so the
// half-contrast ground-truth level set is r < 1.
double ellipse_profile(double x, double y, double cx, double cy, double sa, double sb) {
    const double rx = (x - cx) / sa;
    const double ry = (y - cy) / sb;
    const double r = std::sqrt(rx * rx + ry * ry);
    const double steep = 2.0 * std::min(sa, sb);
    return 1.0 / (1.0 + std::exp(-steep * (1.0 - r)));
}

}  // namespace

MotionPattern motion_pattern_from_string(const std::string& name) {
    if (name == "sinusoid") return MotionPattern::kSinusoid;
    if (name == "sin4") return MotionPattern::kSin4;
    if (name == "static") return MotionPattern::kStatic;
    throw std::invalid_argument("unknown motion pattern: " + name);
}

std::string to_string(MotionPattern p) {
    switch (p) {
        case MotionPattern::kSinusoid: return "sinusoid";
        case MotionPattern::kSin4: return "sin4";
        case MotionPattern::kStatic: return "static";
    }
    return "static";
}

void PhantomConfig::validate() const {
    if (width < 16 || height < 16)
        throw std::invalid_argument("phantom: frame must be at least 16x16");
    if (n_frames < 2) throw std::invalid_argument("phantom: need at least 2 frames");
    if (fps <= 0.0) throw std::invalid_argument("phantom: fps must be positive");
    if (period <= 0.0) throw std::invalid_argument("phantom: period must be positive");
    if (amplitude < 0.0) throw std::invalid_argument("phantom: amplitude must be nonnegative");
    if (spacing.x_mm <= 0.0 || spacing.y_mm <= 0.0)
        throw std::invalid_argument("phantom: spacing must be positive");
    if (target_semi_x <= 0.0 || target_semi_y <= 0.0)
        throw std::invalid_argument("phantom: target semi-axes must be positive");
    if (target_contrast < 0.0 || target_contrast > 1.0)
        throw std::invalid_argument("phantom: contrast must be in [0,1]");
    if (noise_sigma < 0.0) throw std::invalid_argument("phantom: noise sigma must be nonnegative");
    if (blank_frames && (blank_frames->first < 0 || blank_frames->second < blank_frames->first))
        throw std::invalid_argument("phantom: bad blank frame range");
}

Displacement motion_model(double t, const PhantomConfig& cfg) {
    double shape = 0.0;
    switch (cfg.pattern) {
        case MotionPattern::kSinusoid:
            shape = std::sin(2.0 * kPi * t / cfg.period);
            break;
        case MotionPattern::kSin4: {
            const double s = std::sin(kPi * t / cfg.period);
            shape = s * s * s * s;
            break;
        }
        case MotionPattern::kStatic:
            return {0.0, 0.0};
    }
    return {0.3 * cfg.amplitude * shape, cfg.amplitude * shape};
}

PhantomOutput generate(const PhantomConfig& cfg) {
    cfg.validate();
    RandomSource rng(cfg.seed);
    const BackgroundField bg = BackgroundField::draw(rng);

    PhantomOutput out;
    out.sequence.fps = cfg.fps;
    out.ground_truth.centers.resize(cfg.n_frames);
    out.ground_truth.masks.resize(cfg.n_frames);

    for (int i = 0; i < cfg.n_frames; ++i) {
        const double t = i / cfg.fps;
        const Displacement d = motion_model(t, cfg);
        const double cx = cfg.target_cx + d.dx;
        const double cy = cfg.target_cy + d.dy;

        const bool blank = cfg.blank_frames && i >= cfg.blank_frames->first &&
                           i <= cfg.blank_frames->second;

        if (!blank) {
            if (cx - cfg.target_semi_x < 1.0 || cy - cfg.target_semi_y < 1.0 ||
                cx + cfg.target_semi_x > cfg.width - 1.0 ||
                cy + cfg.target_semi_y > cfg.height - 1.0)
                throw std::runtime_error("phantom: target leaves frame at frame " +
                                         std::to_string(i));
        }

        Raster img(cfg.width, cfg.height);
        Mask gt_mask(cfg.width, cfg.height);
        for (int y = 0; y < cfg.height; ++y) {
            for (int x = 0; x < cfg.width; ++x) {
                double v = bg.at(x, y, cfg.width, cfg.height);
                if (!blank) {
                    v -= cfg.target_contrast *
                         ellipse_profile(x, y, cx, cy, cfg.target_semi_x, cfg.target_semi_y);
                    const double rx = (x - cx) / cfg.target_semi_x;
                    const double ry = (y - cy) / cfg.target_semi_y;
                    if (rx * rx + ry * ry < 1.0) gt_mask.at(x, y) = 1;
                }
                if (cfg.distractor) {
                    const DistractorConfig& dc = *cfg.distractor;
                    v -= dc.contrast * ellipse_profile(x, y, dc.cx, dc.cy, dc.semi_x, dc.semi_y);
                }
                img.at(x, y) = v;
            }
        }
        if (cfg.noise_sigma > 0.0)
            for (double& v : img.data) v += rng.normal(0.0, cfg.noise_sigma);

        // clamp and snap to the 8-bit grid so in-memory frames match a
        // write/read round trip exactly
        for (double& v : img.data) {
            v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
            v = std::floor(v * 255.0 + 0.5) / 255.0;
        }

        out.sequence.frames.emplace_back(std::move(img), cfg.spacing, i, t);
        out.ground_truth.centers[i] = {cx, cy, !blank};
        out.ground_truth.masks[i] = std::move(gt_mask);
    }
    validate_sequence(out.sequence);
    return out;
}

void write_phantom(const std::string& dir, const PhantomOutput& out) {
    fs::create_directories(dir);
    const fs::path root(dir);

    nlohmann::json meta;
    meta["spacing_mm_x"] = out.sequence.frames.at(0).spacing().x_mm;
    meta["spacing_mm_y"] = out.sequence.frames.at(0).spacing().y_mm;
    meta["fps"] = out.sequence.fps;
    std::ofstream meta_out(root / "meta.json");
    meta_out << meta.dump(2) << "\n";

    std::ofstream centers(root / "gt_centers.csv");
    centers << "frame,cx_px,cy_px,visible\n" << std::fixed << std::setprecision(6);
    for (std::size_t i = 0; i < out.sequence.frames.size(); ++i) {
        const Frame& f = out.sequence.frames[i];
        write_pgm((root / frame_name(static_cast<int>(i), "", ".pgm")).string(),
                  to_image8(f.image()));

        const auto& c = out.ground_truth.centers[i];
        centers << i << ',' << c.cx << ',' << c.cy << ',' << (c.visible ? 1 : 0) << '\n';

        if (out.ground_truth.masks[i]) {
            const Mask& m = *out.ground_truth.masks[i];
            Image8 img;
            img.width = m.width;
            img.height = m.height;
            img.pixels.resize(m.bits.size());
            for (std::size_t k = 0; k < m.bits.size(); ++k)
                img.pixels[k] = m.bits[k] ? 255 : 0;
            write_png_gray8((root / frame_name(static_cast<int>(i), "gt_mask_", ".png")).string(),
                            img);
        }
    }
}

}  // namespace cinetrack
