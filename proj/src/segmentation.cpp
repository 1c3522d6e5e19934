#include "cinetrack/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace cinetrack {

std::size_t Mask::area() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

std::pair<double, double> Mask::centroid() const {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) return {0.0, 0.0};
    return {sx / n, sy / n};
}

void CvParams::validate() const {
    if (mu < 0.0) throw std::invalid_argument("cv: mu must be nonnegative");
    if (lambda1 <= 0.0 || lambda2 <= 0.0)
        throw std::invalid_argument("cv: lambda weights must be positive");
    if (max_iters < 1) throw std::invalid_argument("cv: max_iters must be >= 1");
    if (tol < 0.0 || tol >= 1.0) throw std::invalid_argument("cv: tol must be in [0,1)");
    if (band < 0) throw std::invalid_argument("cv: band must be nonnegative");
}

Mask init_mask(const BoundingBox& box, int frame_w, int frame_h) {
    if (!box.valid()) throw std::invalid_argument("init_mask: empty box");
    Mask mask(frame_w, frame_h);
    const double a = box.w / 2.0;
    const double b = box.h / 2.0;
    const double cx = box.cx();
    const double cy = box.cy();
    const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
    const int x1 = std::min(frame_w, static_cast<int>(std::ceil(box.x + box.w)) + 1);
    const int y1 = std::min(frame_h, static_cast<int>(std::ceil(box.y + box.h)) + 1);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            // cell centers, so the discrete ellipse is symmetric in the box
            const double rx = (x + 0.5 - cx) / a;
            const double ry = (y + 0.5 - cy) / b;
            if (rx * rx + ry * ry <= 1.0) mask.at(x, y) = 1;
        }
    return mask;
}

namespace {

// One region tracked as count / mean / sum of squared deviations. Welford
// updates keep the flip deltas free of large-sum cancellation.
struct Region {
    std::size_t n = 0;
    double mean = 0.0;
    double sse = 0.0;

    void insert(double v) {
        ++n;
        const double d = v - mean;
        mean += d / n;
        sse += d * (v - mean);
    }
    void remove(double v) {
        if (n == 1) {
            n = 0;
            mean = 0.0;
            sse = 0.0;
            return;
        }
        const double d = v - mean;
        --n;
        mean -= d / n;
        sse -= d * (v - mean);
        if (sse < 0.0) sse = 0.0;
    }
};

// Incremental two-phase state: per-region statistics plus the 4-neighbor
// boundary count. The statistics domain is the given window (whole frame when
// the window spans it), so a small target separates from its local
// surroundings rather than the global intensity distribution.
struct CvState {
    Region in, out;
    long perimeter = 0;

    static CvState from(const Raster& img, const Mask& mask, const SweepWindow& win) {
        CvState s;
        // two-pass means and SSE over the window
        double sum_in = 0.0, sum_out = 0.0;
        std::size_t n_in = 0, n_out = 0;
        for (int y = win.y0; y < win.y1; ++y)
            for (int x = win.x0; x < win.x1; ++x) {
                if (mask.at(x, y)) {
                    sum_in += img.at(x, y);
                    ++n_in;
                } else {
                    sum_out += img.at(x, y);
                    ++n_out;
                }
            }
        s.in.n = n_in;
        s.out.n = n_out;
        s.in.mean = n_in ? sum_in / n_in : 0.0;
        s.out.mean = n_out ? sum_out / n_out : 0.0;
        for (int y = win.y0; y < win.y1; ++y)
            for (int x = win.x0; x < win.x1; ++x) {
                const double v = img.at(x, y);
                if (mask.at(x, y)) s.in.sse += (v - s.in.mean) * (v - s.in.mean);
                else s.out.sse += (v - s.out.mean) * (v - s.out.mean);
            }
        // perimeter over the whole mask; outside the window it never changes
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x) {
                if (x + 1 < mask.width && mask.at(x, y) != mask.at(x + 1, y)) ++s.perimeter;
                if (y + 1 < mask.height && mask.at(x, y) != mask.at(x, y + 1)) ++s.perimeter;
            }
        return s;
    }

    double fit_energy(double lambda1, double lambda2) const {
        return lambda1 * in.sse + lambda2 * out.sse;
    }

    double total_energy(const CvParams& p) const {
        return p.mu * perimeter + p.nu * static_cast<double>(in.n) +
               fit_energy(p.lambda1, p.lambda2);
    }
};

// rounding guard: flips must beat this margin so recomputed energy strictly
// decreases despite incremental floating-point drift
constexpr double kFlipTol = 1e-12;

Mask translated_mask(const Mask& src, int dx, int dy) {
    Mask out(src.width, src.height);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const int sx = x - dx;
            const int sy = y - dy;
            if (sx >= 0 && sy >= 0 && sx < src.width && sy < src.height)
                out.at(x, y) = src.at(sx, sy);
        }
    return out;
}

int perimeter_delta(const Mask& mask, int x, int y) {
    // flipping (x,y): each of the 4 grid neighbors toggles its pair state
    const std::uint8_t v = mask.at(x, y);
    int delta = 0;
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k];
        const int ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
        delta += mask.at(nx, ny) == v ? 1 : -1;
    }
    return delta;
}

}  // namespace

double energy(const Frame& frame, const Mask& mask, const CvParams& params) {
    params.validate();
    if (mask.width != frame.width() || mask.height != frame.height())
        throw std::invalid_argument("energy: mask dimensions do not match frame");
    return CvState::from(frame.image(), mask, {0, 0, mask.width, mask.height})
        .total_energy(params);
}

std::pair<Mask, int> cv_sweep(const Frame& frame, const Mask& mask, const CvParams& params,
                              std::optional<SweepWindow> window) {
    params.validate();
    if (mask.width != frame.width() || mask.height != frame.height())
        throw std::invalid_argument("cv_sweep: mask dimensions do not match frame");

    SweepWindow win = window.value_or(SweepWindow{0, 0, mask.width, mask.height});
    win.x0 = std::max(0, win.x0);
    win.y0 = std::max(0, win.y0);
    win.x1 = std::min(mask.width, win.x1);
    win.y1 = std::min(mask.height, win.y1);

    Mask out = mask;
    CvState state = CvState::from(frame.image(), out, win);
    int changed = 0;

    for (int y = win.y0; y < win.y1; ++y)
        for (int x = win.x0; x < win.x1; ++x) {
            const double v = frame.image().at(x, y);
            const bool inside = out.at(x, y) != 0;

            Region trial_in = state.in;
            Region trial_out = state.out;
            if (inside) {
                trial_in.remove(v);
                trial_out.insert(v);
            } else {
                trial_out.remove(v);
                trial_in.insert(v);
            }
            const double delta_fit = params.lambda1 * (trial_in.sse - state.in.sse) +
                                     params.lambda2 * (trial_out.sse - state.out.sse);
            const int dper = perimeter_delta(out, x, y);
            const double delta = delta_fit + params.mu * dper + params.nu * (inside ? -1.0 : 1.0);
            if (delta < -kFlipTol) {
                out.at(x, y) = inside ? 0 : 1;
                state.in = trial_in;
                state.out = trial_out;
                state.perimeter += dper;
                ++changed;
            }
        }
    return {std::move(out), changed};
}

SegResult segment_frame(const Frame& frame, double tracked_cx, double tracked_cy,
                        const std::optional<Mask>& prev_mask, const BoundingBox& tracked_box,
                        const CvParams& params) {
    params.validate();
    if (tracked_cx < 0.0 || tracked_cy < 0.0 || tracked_cx > frame.width() - 1.0 ||
        tracked_cy > frame.height() - 1.0)
        throw std::invalid_argument("segment_frame: tracked center outside frame");

    Mask seed;
    if (prev_mask && prev_mask->area() > 0) {
        const auto [pcx, pcy] = prev_mask->centroid();
        seed = translated_mask(*prev_mask, round_px(tracked_cx - pcx),
                               round_px(tracked_cy - pcy));
    } else {
        seed = init_mask(tracked_box, frame.width(), frame.height());
    }

    SweepWindow win;
    win.x0 = static_cast<int>(std::floor(tracked_box.x)) - params.band;
    win.y0 = static_cast<int>(std::floor(tracked_box.y)) - params.band;
    win.x1 = static_cast<int>(std::ceil(tracked_box.x + tracked_box.w)) + params.band;
    win.y1 = static_cast<int>(std::ceil(tracked_box.y + tracked_box.h)) + params.band;
    win.x0 = std::max(0, win.x0);
    win.y0 = std::max(0, win.y0);
    win.x1 = std::min(frame.width(), win.x1);
    win.y1 = std::min(frame.height(), win.y1);
    const double window_area =
        std::max(1.0, static_cast<double>(win.x1 - win.x0) * (win.y1 - win.y0));

    // the segmentation lives in the working window; stale bits elsewhere
    // would never be revisited
    for (int y = 0; y < seed.height; ++y)
        for (int x = 0; x < seed.width; ++x)
            if (x < win.x0 || x >= win.x1 || y < win.y0 || y >= win.y1) seed.at(x, y) = 0;

    Mask mask = std::move(seed);
    int iters = 0;
    while (iters < params.max_iters) {
        auto [next, changed] = cv_sweep(frame, mask, params, win);
        mask = std::move(next);
        ++iters;
        if (changed / window_area < params.tol || changed == 0) break;
    }

    SegResult res;
    res.iters_used = iters;
    const std::size_t area = mask.area();
    res.degenerate = area == 0 || area >= static_cast<std::size_t>(window_area);
    if (res.degenerate && prev_mask) {
        // fall back to the translated previous mask
        const auto [pcx, pcy] = prev_mask->centroid();
        mask = translated_mask(*prev_mask, round_px(tracked_cx - pcx),
                               round_px(tracked_cy - pcy));
    }

    // reported energy and region means follow the full-frame definition
    const CvState state =
        CvState::from(frame.image(), mask, {0, 0, mask.width, mask.height});
    res.energy = state.total_energy(params);
    res.c1 = state.in.n > 0 ? state.in.mean : 0.0;
    res.c2 = state.out.n > 0 ? state.out.mean : 0.0;
    res.mask = std::move(mask);
    return res;
}

}  // namespace cinetrack
