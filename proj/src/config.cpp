#include "cinetrack/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cinetrack {

void RunConfig::validate() const {
    pre.validate();
    mf.validate();
    det.validate();
    learn.validate();
    cv.validate();
    phantom.validate();
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (nriqa_noise_weight < 0.0)
        throw std::invalid_argument("config: nriqa.noise_weight must be nonnegative");
}

void RunConfig::set_key(const std::string& key, double v) {
    if (key == "pre.low_pct") pre.low_pct = v;
    else if (key == "pre.high_pct") pre.high_pct = v;
    else if (key == "pre.gamma") pre.gamma = v;
    else if (key == "pre.sigma") pre.sigma = v;
    else if (key == "nriqa.noise_weight") nriqa_noise_weight = v;
    else if (key == "nriqa.outlier_guard") nriqa_outlier_guard = v;
    else if (key == "mf.pyramid_levels") mf.pyramid_levels = static_cast<int>(v);
    else if (key == "mf.lk_window") mf.lk_window = static_cast<int>(v);
    else if (key == "mf.lk_iterations") mf.lk_iterations = static_cast<int>(v);
    else if (key == "mf.lk_epsilon") mf.lk_epsilon = v;
    else if (key == "mf.grid") mf.grid = static_cast<int>(v);
    else if (key == "mf.fb_max") mf.fb_max = v;
    else if (key == "det.min_win") det.min_win = static_cast<int>(v);
    else if (key == "det.scale_step") det.scale_step = v;
    else if (key == "det.shift_frac") det.shift_frac = v;
    else if (key == "det.var_frac") det.var_frac = v;
    else if (key == "det.n_ferns") det.n_ferns = static_cast<int>(v);
    else if (key == "det.fern_features") det.fern_features = static_cast<int>(v);
    else if (key == "det.fern_threshold") det.fern_threshold = v;
    else if (key == "det.nn_threshold") det.nn_threshold = v;
    else if (key == "det.region_side") det.region_side = static_cast<int>(v);
    else if (key == "det.region_history") det.region_history = static_cast<int>(v);
    else if (key == "det.patch_side") det.patch_side = static_cast<int>(v);
    else if (key == "det.seed") {
        det.seed = static_cast<std::uint64_t>(v);
        det_seed_overridden = true;
    } else if (key == "learn.pos_overlap") learn.pos_overlap = v;
    else if (key == "learn.neg_overlap") learn.neg_overlap = v;
    else if (key == "learn.core_valid_sim") learn.core_valid_sim = v;
    else if (key == "learn.max_patches") learn.max_patches = static_cast<int>(v);
    else if (key == "cv.mu") cv.mu = v;
    else if (key == "cv.nu") cv.nu = v;
    else if (key == "cv.lambda1") cv.lambda1 = v;
    else if (key == "cv.lambda2") cv.lambda2 = v;
    else if (key == "cv.max_iters") cv.max_iters = static_cast<int>(v);
    else if (key == "cv.tol") cv.tol = v;
    else if (key == "cv.band") cv.band = static_cast<int>(v);
    else if (key == "phantom.width") phantom.width = static_cast<int>(v);
    else if (key == "phantom.height") phantom.height = static_cast<int>(v);
    else if (key == "phantom.n_frames") phantom.n_frames = static_cast<int>(v);
    else if (key == "phantom.fps") phantom.fps = v;
    else if (key == "phantom.spacing_mm_x") phantom.spacing.x_mm = v;
    else if (key == "phantom.spacing_mm_y") phantom.spacing.y_mm = v;
    else if (key == "phantom.amplitude") phantom.amplitude = v;
    else if (key == "phantom.period") phantom.period = v;
    else if (key == "phantom.target_cx") phantom.target_cx = v;
    else if (key == "phantom.target_cy") phantom.target_cy = v;
    else if (key == "phantom.target_semi_x") phantom.target_semi_x = v;
    else if (key == "phantom.target_semi_y") phantom.target_semi_y = v;
    else if (key == "phantom.target_contrast") phantom.target_contrast = v;
    else if (key == "phantom.noise_sigma") phantom.noise_sigma = v;
    else if (key == "phantom.seed") {
        phantom.seed = static_cast<std::uint64_t>(v);
        phantom_seed_overridden = true;
    } else if (key == "pipe.detector_margin") detector_margin = v;
    else if (key == "pipe.min_scale_step") min_scale_step = v;
    else if (key == "pipe.max_scale_step") max_scale_step = v;
    else if (key == "pipe.max_invalid_before_global") max_invalid_before_global = static_cast<int>(v);
    else if (key == "seed") {
        seed = static_cast<std::uint64_t>(v);
        if (!det_seed_overridden) det.seed = seed;
        if (!phantom_seed_overridden) phantom.seed = seed;
    } else if (key == "threads") threads = static_cast<int>(v);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void RunConfig::set_key(const std::string& key, const std::string& value) {
    if (key == "phantom.pattern") phantom.pattern = motion_pattern_from_string(value);
    else throw std::invalid_argument("config: unknown string key '" + key + "'");
}

void RunConfig::apply_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: bad JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (value.is_number()) set_key(key, value.get<double>());
        else if (value.is_string()) set_key(key, value.get<std::string>());
        else throw std::invalid_argument("config: value for '" + key + "' must be number or string");
    }
}

void RunConfig::apply_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    apply_json_text(ss.str());
}

std::string RunConfig::to_json() const {
    nlohmann::json j;
    j["pre.low_pct"] = pre.low_pct;
    j["pre.high_pct"] = pre.high_pct;
    j["pre.gamma"] = pre.gamma;
    j["pre.sigma"] = pre.sigma;
    j["nriqa.noise_weight"] = nriqa_noise_weight;
    j["nriqa.outlier_guard"] = nriqa_outlier_guard;
    j["mf.pyramid_levels"] = mf.pyramid_levels;
    j["mf.lk_window"] = mf.lk_window;
    j["mf.lk_iterations"] = mf.lk_iterations;
    j["mf.lk_epsilon"] = mf.lk_epsilon;
    j["mf.grid"] = mf.grid;
    j["mf.fb_max"] = mf.fb_max;
    j["det.min_win"] = det.min_win;
    j["det.scale_step"] = det.scale_step;
    j["det.shift_frac"] = det.shift_frac;
    j["det.var_frac"] = det.var_frac;
    j["det.n_ferns"] = det.n_ferns;
    j["det.fern_features"] = det.fern_features;
    j["det.fern_threshold"] = det.fern_threshold;
    j["det.nn_threshold"] = det.nn_threshold;
    j["det.region_side"] = det.region_side;
    j["det.region_history"] = det.region_history;
    j["det.patch_side"] = det.patch_side;
    j["det.seed"] = det.seed;
    j["learn.pos_overlap"] = learn.pos_overlap;
    j["learn.neg_overlap"] = learn.neg_overlap;
    j["learn.core_valid_sim"] = learn.core_valid_sim;
    j["learn.max_patches"] = learn.max_patches;
    j["cv.mu"] = cv.mu;
    j["cv.nu"] = cv.nu;
    j["cv.lambda1"] = cv.lambda1;
    j["cv.lambda2"] = cv.lambda2;
    j["cv.max_iters"] = cv.max_iters;
    j["cv.tol"] = cv.tol;
    j["cv.band"] = cv.band;
    j["phantom.width"] = phantom.width;
    j["phantom.height"] = phantom.height;
    j["phantom.n_frames"] = phantom.n_frames;
    j["phantom.fps"] = phantom.fps;
    j["phantom.spacing_mm_x"] = phantom.spacing.x_mm;
    j["phantom.spacing_mm_y"] = phantom.spacing.y_mm;
    j["phantom.amplitude"] = phantom.amplitude;
    j["phantom.period"] = phantom.period;
    j["phantom.pattern"] = to_string(phantom.pattern);
    j["phantom.target_cx"] = phantom.target_cx;
    j["phantom.target_cy"] = phantom.target_cy;
    j["phantom.target_semi_x"] = phantom.target_semi_x;
    j["phantom.target_semi_y"] = phantom.target_semi_y;
    j["phantom.target_contrast"] = phantom.target_contrast;
    j["phantom.noise_sigma"] = phantom.noise_sigma;
    j["phantom.seed"] = phantom.seed;
    j["pipe.detector_margin"] = detector_margin;
    j["pipe.min_scale_step"] = min_scale_step;
    j["pipe.max_scale_step"] = max_scale_step;
    j["pipe.max_invalid_before_global"] = max_invalid_before_global;
    j["seed"] = seed;
    j["threads"] = threads;
    return j.dump(2);
}

std::string RunConfig::hash() const {
    const std::string text = to_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PipelineParams RunConfig::pipeline_params() const {
    PipelineParams p;
    p.tracker = mf;
    p.detector = det;
    p.learning = learn;
    p.threads = threads;
    p.detector_margin = detector_margin;
    p.min_scale_step = min_scale_step;
    p.max_scale_step = max_scale_step;
    p.max_invalid_before_global = max_invalid_before_global;
    return p;
}

RunConfigBundle RunConfig::bundle() const {
    RunConfigBundle b;
    b.preprocess = pre;
    b.pipeline = pipeline_params();
    b.nriqa_noise_weight = nriqa_noise_weight;
    b.nriqa_outlier_guard = nriqa_outlier_guard;
    return b;
}

}  // namespace cinetrack
