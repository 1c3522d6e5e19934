#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cinetrack/config.hpp"
#include "cinetrack/image_io.hpp"
#include "cinetrack/metrics.hpp"
#include "cinetrack/phantom.hpp"
#include "cinetrack/pipeline.hpp"
#include "cinetrack/segmentation.hpp"

namespace fs = std::filesystem;
using namespace cinetrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitQualityGate = 4;

struct CliError : std::runtime_error {
    int code;
    CliError(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
};

std::string frame_name(int index, const char* prefix, const char* ext) {
    std::ostringstream os;
    os << prefix << std::setw(4) << std::setfill('0') << index << ext;
    return os.str();
}

BoundingBox parse_init_box(const std::string& text) {
    BoundingBox box;
    char c1, c2, c3;
    std::istringstream is(text);
    if (!(is >> box.x >> c1 >> box.y >> c2 >> box.w >> c3 >> box.h) || c1 != ',' || c2 != ',' ||
        c3 != ',' || !box.valid())
        throw CliError(kExitUsage, "--init expects x,y,w,h with positive extents");
    return box;
}

RunConfig load_config(const std::string& config_path, const std::vector<std::string>& sets) {
    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg.apply_json_file(config_path);
        for (const std::string& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--set expects key=value: " + kv);
            const std::string key = kv.substr(0, eq);
            const std::string value = kv.substr(eq + 1);
            try {
                std::size_t used = 0;
                const double num = std::stod(value, &used);
                if (used == value.size()) {
                    cfg.set_key(key, num);
                    continue;
                }
            } catch (const std::logic_error&) {
            }
            cfg.set_key(key, value);
        }
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    } catch (const std::runtime_error& e) {
        throw CliError(kExitIo, e.what());
    }
    return cfg;
}

Sequence load_sequence_or_die(const std::string& dir) {
    try {
        return load_sequence(dir);
    } catch (const std::exception& e) {
        throw CliError(kExitIo, e.what());
    }
}

GroundTruth load_ground_truth(const std::string& seq_dir, bool need_masks, int n_frames) {
    GroundTruth gt;
    const fs::path centers_path = fs::path(seq_dir) / "gt_centers.csv";
    std::ifstream in(centers_path);
    if (!in) throw CliError(kExitIo, "missing " + centers_path.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string tok;
        GroundTruth::Center c;
        std::getline(is, tok, ',');
        const int frame = std::stoi(tok);
        std::getline(is, tok, ',');
        c.cx = std::stod(tok);
        std::getline(is, tok, ',');
        c.cy = std::stod(tok);
        std::getline(is, tok, ',');
        c.visible = std::stoi(tok) != 0;
        if (frame != static_cast<int>(gt.centers.size()))
            throw CliError(kExitIo, "gt_centers.csv: frame indices misaligned at row " + tok);
        gt.centers.push_back(c);
    }
    if (n_frames > 0 && static_cast<int>(gt.centers.size()) != n_frames)
        throw CliError(kExitIo, "gt_centers.csv row count does not match the sequence");

    gt.masks.assign(gt.centers.size(), std::nullopt);
    if (need_masks) {
        for (std::size_t i = 0; i < gt.centers.size(); ++i) {
            const fs::path p =
                fs::path(seq_dir) / frame_name(static_cast<int>(i), "gt_mask_", ".png");
            if (!fs::exists(p)) continue;
            const Image8 img = read_png_gray8(p.string());
            Mask m(img.width, img.height);
            for (std::size_t k = 0; k < img.pixels.size(); ++k) m.bits[k] = img.pixels[k] >= 128;
            gt.masks[i] = std::move(m);
        }
    }
    return gt;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw CliError(kExitIo, "cannot write " + path);
    out << "frame,valid,x_px,y_px,w_px,h_px,dx_mm,dy_mm,confidence,latency_ms\n";
    out << std::fixed << std::setprecision(6);
    for (const TrackResult& r : traj.results) {
        out << r.frame_index << ',' << (r.valid ? 1 : 0) << ',';
        if (r.valid) {
            out << r.box->x << ',' << r.box->y << ',' << r.box->w << ',' << r.box->h << ','
                << r.dx_mm << ',' << r.dy_mm << ',';
        } else {
            out << ",,,,,,";
        }
        out << r.confidence << ',' << r.latency_s * 1000.0 << '\n';
    }
}

Trajectory read_trajectory_csv(const std::string& path, Spacing spacing) {
    std::ifstream in(path);
    if (!in) throw CliError(kExitIo, "cannot read " + path);
    Trajectory traj;
    traj.spacing = spacing;
    std::string line;
    std::getline(in, line);
    if (line.rfind("frame,valid", 0) != 0)
        throw CliError(kExitIo, path + ": not a trajectory.csv");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string tok;
        TrackResult r;
        auto next = [&]() {
            if (!std::getline(is, tok, ',')) tok.clear();
            return tok;
        };
        r.frame_index = std::stoi(next());
        r.valid = std::stoi(next()) != 0;
        const std::string x = next(), y = next(), w = next(), h = next();
        const std::string dx = next(), dy = next();
        if (r.valid) {
            r.box = BoundingBox{std::stod(x), std::stod(y), std::stod(w), std::stod(h)};
            r.dx_mm = std::stod(dx);
            r.dy_mm = std::stod(dy);
        }
        r.confidence = std::stod(next());
        r.latency_s = std::stod(next()) / 1000.0;
        traj.results.push_back(r);
    }
    return traj;
}

void write_quality_csv(const std::string& path, const RunOutput& run) {
    std::ofstream out(path);
    if (!out) throw CliError(kExitIo, "cannot write " + path);
    out << "frame,contrast,sharpness,noise,score,admitted\n";
    out << std::fixed << std::setprecision(6);
    for (std::size_t i = 0; i < run.quality_scores.size(); ++i) {
        const QualityFeatures& f = run.quality_features[i];
        out << i << ',' << f.contrast << ',' << f.sharpness << ',' << f.noise << ','
            << run.quality_scores[i] << ',' << (run.admitted[i] ? 1 : 0) << '\n';
    }
}

struct SegmentationOutput {
    std::vector<std::optional<Mask>> masks;
    std::vector<double> latencies_s;  // aligned with segmented frames only
};

SegmentationOutput run_segmentation(const std::vector<Frame>& frames, const Trajectory& traj,
                                    const GroundTruth* gt, const RunConfig& cfg,
                                    const std::string& out_dir, bool write_masks) {
    SegmentationOutput seg;
    seg.masks.assign(frames.size(), std::nullopt);
    std::ofstream csv(fs::path(out_dir) / "segmentation.csv");
    if (!csv) throw CliError(kExitIo, "cannot write segmentation.csv");
    csv << "frame,area_px,c1,c2,energy,iters,dice_vs_gt\n";
    csv << std::fixed << std::setprecision(6);
    std::ofstream timing(fs::path(out_dir) / "seg_timing.csv");
    timing << "frame,latency_ms\n" << std::fixed << std::setprecision(6);

    std::optional<Mask> prev_mask;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const TrackResult& r = traj.results.at(i);
        if (!r.valid) continue;
        const auto start = std::chrono::steady_clock::now();
        const SegResult sr = segment_frame(frames[i], r.box->cx(), r.box->cy(), prev_mask,
                                           *r.box, cfg.cv);
        const double latency =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        seg.latencies_s.push_back(latency);
        prev_mask = sr.mask;
        seg.masks[i] = sr.mask;

        csv << i << ',' << sr.mask.area() << ',' << sr.c1 << ',' << sr.c2 << ',' << sr.energy
            << ',' << sr.iters_used << ',';
        if (gt && i < gt->masks.size() && gt->masks[i]) csv << dice(sr.mask, *gt->masks[i]);
        csv << '\n';
        timing << i << ',' << latency * 1000.0 << '\n';

        if (write_masks) {
            Image8 img;
            img.width = sr.mask.width;
            img.height = sr.mask.height;
            img.pixels.resize(sr.mask.bits.size());
            for (std::size_t k = 0; k < sr.mask.bits.size(); ++k)
                img.pixels[k] = sr.mask.bits[k] ? 255 : 0;
            write_png_gray8(
                (fs::path(out_dir) / frame_name(static_cast<int>(i), "mask_", ".png")).string(),
                img);
        }
    }
    return seg;
}

int cmd_phantom(const std::string& out_dir, const RunConfig& cfg) {
    try {
        const PhantomOutput out = generate(cfg.phantom);
        write_phantom(out_dir, out);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    } catch (const std::runtime_error& e) {
        throw CliError(kExitUsage, e.what());
    }
    std::cout << "wrote " << cfg.phantom.n_frames << " frames to " << out_dir << "\n";
    return kExitOk;
}

RunOutput run_tracking(const Sequence& seq, const BoundingBox& init_box, const RunConfig& cfg) {
    if (!init_box.in_frame(seq.frames.at(0).width(), seq.frames.at(0).height()))
        throw CliError(kExitUsage, "--init box is outside the frame");
    try {
        return run_pipeline(seq, init_box, cfg.bundle());
    } catch (const std::runtime_error& e) {
        throw CliError(kExitQualityGate, e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    }
}

int cmd_track(const std::string& seq_dir, const std::string& init_text,
              const std::string& out_dir, const RunConfig& cfg) {
    const Sequence seq = load_sequence_or_die(seq_dir);
    const BoundingBox init_box = parse_init_box(init_text);
    const RunOutput run = run_tracking(seq, init_box, cfg);
    fs::create_directories(out_dir);
    write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(), run.trajectory);
    write_quality_csv((fs::path(out_dir) / "quality.csv").string(), run);
    std::cout << "tracked " << seq.size() << " frames\n";
    return kExitOk;
}

int cmd_score(const std::string& seq_dir, const std::string& out_dir, const RunConfig& cfg) {
    const Sequence seq = load_sequence_or_die(seq_dir);
    RunOutput run;
    for (const Frame& f : seq.frames) run.preprocessed.push_back(preprocess(f, cfg.pre));
    for (const Frame& f : run.preprocessed) run.quality_features.push_back(quality_features(f));
    const CorpusStats stats = fit_corpus_stats(run.quality_features);
    for (const auto& f : run.quality_features)
        run.quality_scores.push_back(nriqa_score(f, stats, cfg.nriqa_noise_weight));
    if (run.quality_scores.size() >= 20) {
        run.gate = fit_gate(run.quality_scores);
        for (double s : run.quality_scores) run.admitted.push_back(admit(s, run.gate));
    } else {
        run.admitted.assign(run.quality_scores.size(), true);
    }
    fs::create_directories(out_dir);
    write_quality_csv((fs::path(out_dir) / "quality.csv").string(), run);
    std::cout << "scored " << seq.size() << " frames\n";
    return kExitOk;
}

int cmd_segment(const std::string& seq_dir, const std::string& init_text,
                const std::string& trajectory_path, bool with_track, const std::string& out_dir,
                const RunConfig& cfg) {
    const Sequence seq = load_sequence_or_die(seq_dir);
    fs::create_directories(out_dir);

    Trajectory traj;
    if (with_track) {
        const BoundingBox init_box = parse_init_box(init_text);
        RunOutput run = run_tracking(seq, init_box, cfg);
        traj = run.trajectory;
        write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(), traj);
        write_quality_csv((fs::path(out_dir) / "quality.csv").string(), run);
    } else {
        if (trajectory_path.empty() || !fs::exists(trajectory_path))
            throw CliError(kExitIo, "missing trajectory (use --trajectory or --with-track)");
        traj = read_trajectory_csv(trajectory_path, seq.frames.at(0).spacing());
        if (traj.size() != seq.size())
            throw CliError(kExitIo, "trajectory length does not match the sequence");
    }

    GroundTruth gt;
    const bool have_gt = fs::exists(fs::path(seq_dir) / "gt_centers.csv");
    if (have_gt) gt = load_ground_truth(seq_dir, true, static_cast<int>(seq.size()));
    // segmentation reads the original intensities; preprocessing exists to
    // serve the tracker's assumptions
    run_segmentation(seq.frames, traj, have_gt ? &gt : nullptr, cfg, out_dir, true);
    std::cout << "segmented " << seq.size() << " frames\n";
    return kExitOk;
}

int cmd_eval(const std::string& seq_dir, const std::string& trajectory_path,
             const std::string& masks_dir, double theta_px, std::optional<double> theta_mm,
             const std::string& out_dir, const RunConfig& cfg) {
    const Sequence seq = load_sequence_or_die(seq_dir);
    const Spacing spacing = seq.frames.at(0).spacing();
    if (theta_mm) theta_px = *theta_mm / ((spacing.x_mm + spacing.y_mm) / 2.0);

    const Trajectory traj = read_trajectory_csv(trajectory_path, spacing);
    if (traj.size() != seq.size())
        throw CliError(kExitIo, "trajectory length does not match the sequence");
    const GroundTruth gt = load_ground_truth(seq_dir, true, static_cast<int>(seq.size()));

    EvalReport report;
    report.theta_px = theta_px;
    try {
        const auto [mean, std] = mae(traj, gt);
        report.mae_mm_mean = mean;
        report.mae_mm_std = std;
        report.cc = pearson_cc(traj, gt);
        const PrecisionRecall pr = precision_recall(traj, gt, theta_px);
        report.precision = pr.precision;
        report.recall = pr.recall;
        const PrCurves curves = pr_curves(traj, gt, 50);
        report.precision_curve = curves.precision;
        report.recall_curve = curves.recall;
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitIo, e.what());
    }

    // segmentation metrics when predicted masks are present
    bool have_masks = false;
    std::vector<std::optional<Mask>> pred_masks(seq.size());
    if (!masks_dir.empty()) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const fs::path p = fs::path(masks_dir) / frame_name(static_cast<int>(i), "mask_", ".png");
            if (!fs::exists(p)) continue;
            const Image8 img = read_png_gray8(p.string());
            Mask m(img.width, img.height);
            for (std::size_t k = 0; k < img.pixels.size(); ++k) m.bits[k] = img.pixels[k] >= 128;
            pred_masks[i] = std::move(m);
            have_masks = true;
        }
    }
    if (have_masks) {
        report.dice_global = dice_global(pred_masks, gt.masks);
        for (std::size_t i = 0; i < seq.size(); ++i)
            if (gt.masks[i] && pred_masks[i])
                report.dice_per_frame.push_back(dice(*pred_masks[i], *gt.masks[i]));
    }

    // FPS from recorded latencies, initialization frame excluded
    std::vector<double> track_latencies;
    for (std::size_t i = 1; i < traj.results.size(); ++i)
        track_latencies.push_back(traj.results[i].latency_s);
    if (track_latencies.size() >= 2) {
        const auto [mean, std] = fps_stats(track_latencies);
        report.fps_track_mean = mean;
        report.fps_track_std = std;
    }
    if (!masks_dir.empty()) {
        const fs::path timing_path = fs::path(masks_dir) / "seg_timing.csv";
        if (fs::exists(timing_path)) {
            std::ifstream in(timing_path);
            std::string line;
            std::getline(in, line);
            std::vector<double> seg_latencies;
            bool first = true;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const auto comma = line.find(',');
                if (first) {  // initialization frame excluded
                    first = false;
                    continue;
                }
                seg_latencies.push_back(std::stod(line.substr(comma + 1)) / 1000.0);
            }
            if (seg_latencies.size() >= 2) {
                const auto [mean, std] = fps_stats(seg_latencies);
                report.fps_seg_mean = mean;
                report.fps_seg_std = std;
            }
        }
    }

    fs::create_directories(out_dir);
    nlohmann::json j;
    j["mae_mm_mean"] = report.mae_mm_mean;
    j["mae_mm_std"] = report.mae_mm_std;
    if (report.cc) j["cc"] = *report.cc;
    else j["cc"] = nullptr;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["theta_px"] = report.theta_px;
    if (report.dice_global) j["dice_global"] = *report.dice_global;
    if (report.fps_track_mean) {
        j["fps_track_mean"] = *report.fps_track_mean;
        j["fps_track_std"] = *report.fps_track_std;
    }
    if (report.fps_seg_mean) {
        j["fps_seg_mean"] = *report.fps_seg_mean;
        j["fps_seg_std"] = *report.fps_seg_std;
    }
    j["config"] = nlohmann::json::parse(cfg.to_json());
    j["config_hash"] = cfg.hash();
    std::ofstream report_out(fs::path(out_dir) / "report.json");
    report_out << j.dump(2) << "\n";

    std::ofstream curves_out(fs::path(out_dir) / "curves.csv");
    curves_out << "theta_px,precision,recall\n" << std::fixed << std::setprecision(6);
    for (std::size_t t = 0; t < report.precision_curve.size(); ++t)
        curves_out << t << ',' << report.precision_curve[t] << ',' << report.recall_curve[t]
                   << '\n';

    std::cout << "report written to " << out_dir << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& seq_dir, const std::string& candidates_path,
              const std::string& out_dir, const RunConfig& cfg) {
    const Sequence seq = load_sequence_or_die(seq_dir);

    std::ifstream in(candidates_path);
    if (!in) throw CliError(kExitIo, "cannot read " + candidates_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CliError(kExitUsage, std::string("bad candidates file: ") + e.what());
    }
    if (!j.is_array() || j.size() < 2)
        throw CliError(kExitUsage, "candidates file must be a JSON array of at least 2 configs");

    std::vector<PreprocessConfig> candidates;
    for (const auto& item : j) {
        RunConfig c = cfg;
        try {
            c.apply_json_text(item.dump());
            c.pre.validate();
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitUsage, e.what());
        }
        candidates.push_back(c.pre);
    }

    // pooled corpus across all candidates gives a common scoring reference
    std::vector<std::vector<QualityFeatures>> feats(candidates.size());
    std::vector<QualityFeatures> pool;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        for (const Frame& f : seq.frames) {
            feats[c].push_back(quality_features(preprocess(f, candidates[c])));
            pool.push_back(feats[c].back());
        }
    }
    const CorpusStats stats = fit_corpus_stats(pool);

    std::vector<std::pair<double, std::size_t>> ranking;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double mean = 0.0;
        for (const auto& f : feats[c]) mean += nriqa_score(f, stats, cfg.nriqa_noise_weight);
        ranking.emplace_back(mean / feats[c].size(), c);
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "sweep_ranking.csv");
    csv << "rank,candidate,mean_score,low_pct,high_pct,gamma,sigma\n"
        << std::fixed << std::setprecision(6);
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        const auto& [score, c] = ranking[r];
        csv << r << ',' << c << ',' << score << ',' << candidates[c].low_pct << ','
            << candidates[c].high_pct << ',' << candidates[c].gamma << ','
            << candidates[c].sigma << '\n';
    }
    const PreprocessConfig& best = candidates[ranking[0].second];
    nlohmann::json winner;
    winner["pre.low_pct"] = best.low_pct;
    winner["pre.high_pct"] = best.high_pct;
    winner["pre.gamma"] = best.gamma;
    winner["pre.sigma"] = best.sigma;
    winner["mean_score"] = ranking[0].first;
    std::ofstream winner_out(fs::path(out_dir) / "sweep_winner.json");
    winner_out << winner.dump(2) << "\n";
    std::cout << "winner: candidate " << ranking[0].second << " (mean score " << ranking[0].first
              << ")\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cine-sequence target tracking, segmentation, and evaluation"};
    app.require_subcommand(1);

    std::string seq_dir, out_dir = ".", init_text, config_path, trajectory_path, masks_dir;
    std::string candidates_path;
    std::vector<std::string> sets;
    bool with_track = false;
    double theta_px = 20.0;
    std::optional<double> theta_mm;

    int threads = 0;
    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file (flat namespaced keys)");
        cmd->add_option("--set", sets, "override a config key, key=value (repeatable)");
        cmd->add_option("--threads", threads, "worker thread cap (default 1)");
    };

    CLI::App* phantom = app.add_subcommand("phantom", "generate a synthetic sequence with GT");
    phantom->add_option("--out", out_dir, "output directory")->required();
    add_config_opts(phantom);
    phantom->add_option("--frames", "frame count");
    phantom->add_option("--fps", "frames per second");
    phantom->add_option("--width", "frame width px");
    phantom->add_option("--height", "frame height px");
    phantom->add_option("--amp", "motion amplitude px");
    phantom->add_option("--period", "motion period s");
    phantom->add_option("--pattern", "sinusoid|sin4|static");
    phantom->add_option("--noise", "noise sigma");
    phantom->add_option("--spacing", "mm per px (both axes)");
    phantom->add_option("--seed", "random seed");
    phantom->add_option("--contrast", "target contrast");
    phantom->add_option("--distractor", "cx,cy,sx,sy,contrast");
    phantom->add_option("--blank", "first:last blanked frame range");

    CLI::App* track = app.add_subcommand("track", "run the tracking pipeline");
    track->add_option("--seq", seq_dir, "sequence directory")->required();
    track->add_option("--init", init_text, "initial box x,y,w,h")->required();
    track->add_option("--out", out_dir, "output directory");
    add_config_opts(track);

    CLI::App* segment = app.add_subcommand("segment", "segment tracked frames");
    segment->add_option("--seq", seq_dir, "sequence directory")->required();
    segment->add_option("--trajectory", trajectory_path, "trajectory.csv from a track run");
    segment->add_option("--init", init_text, "initial box x,y,w,h (for --with-track)");
    segment->add_flag("--with-track", with_track, "run tracking and segmentation in one pass");
    segment->add_option("--out", out_dir, "output directory");
    add_config_opts(segment);

    CLI::App* eval = app.add_subcommand("eval", "evaluate a run against ground truth");
    eval->add_option("--seq", seq_dir, "sequence directory (provides GT and spacing)")->required();
    eval->add_option("--trajectory", trajectory_path, "trajectory.csv")->required();
    eval->add_option("--masks", masks_dir, "directory with mask_NNNN.png predictions");
    eval->add_option("--theta", theta_px, "location error threshold, px");
    eval->add_option("--theta-mm", "location error threshold, mm");
    eval->add_option("--out", out_dir, "output directory");
    add_config_opts(eval);

    CLI::App* score = app.add_subcommand("score", "NRIQA-score a sequence");
    score->add_option("--seq", seq_dir, "sequence directory")->required();
    score->add_option("--out", out_dir, "output directory");
    add_config_opts(score);

    CLI::App* sweep = app.add_subcommand("sweep", "rank preprocessing candidates by mean NRIQA");
    sweep->add_option("--seq", seq_dir, "sequence directory")->required();
    sweep->add_option("--candidates", candidates_path, "JSON array of pre.* configs")->required();
    sweep->add_option("--out", out_dir, "output directory");
    add_config_opts(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        RunConfig cfg = load_config(config_path, sets);
        if (threads > 0) cfg.set_key("threads", static_cast<double>(threads));

        if (phantom->parsed()) {
            auto getd = [&](const char* name, const std::string& key) {
                if (phantom->count(name)) cfg.set_key(key, phantom->get_option(name)->as<double>());
            };
            getd("--frames", "phantom.n_frames");
            getd("--fps", "phantom.fps");
            getd("--width", "phantom.width");
            getd("--height", "phantom.height");
            getd("--amp", "phantom.amplitude");
            getd("--period", "phantom.period");
            getd("--noise", "phantom.noise_sigma");
            getd("--seed", "phantom.seed");
            getd("--contrast", "phantom.target_contrast");
            if (phantom->count("--spacing")) {
                const double s = phantom->get_option("--spacing")->as<double>();
                cfg.set_key("phantom.spacing_mm_x", s);
                cfg.set_key("phantom.spacing_mm_y", s);
            }
            if (phantom->count("--pattern"))
                cfg.set_key("phantom.pattern", phantom->get_option("--pattern")->as<std::string>());
            if (phantom->count("--distractor")) {
                const std::string text = phantom->get_option("--distractor")->as<std::string>();
                DistractorConfig d;
                char c;
                std::istringstream is(text);
                if (!(is >> d.cx >> c >> d.cy >> c >> d.semi_x >> c >> d.semi_y >> c >>
                      d.contrast))
                    throw CliError(kExitUsage, "--distractor expects cx,cy,sx,sy,contrast");
                cfg.phantom.distractor = d;
            }
            if (phantom->count("--blank")) {
                const std::string text = phantom->get_option("--blank")->as<std::string>();
                int a = 0, b = 0;
                char c;
                std::istringstream is(text);
                if (!(is >> a >> c >> b) || c != ':')
                    throw CliError(kExitUsage, "--blank expects first:last");
                cfg.phantom.blank_frames = {a, b};
            }
            try {
                cfg.phantom.validate();
            } catch (const std::invalid_argument& e) {
                throw CliError(kExitUsage, e.what());
            }
            return cmd_phantom(out_dir, cfg);
        }
        if (track->parsed()) return cmd_track(seq_dir, init_text, out_dir, cfg);
        if (segment->parsed())
            return cmd_segment(seq_dir, init_text, trajectory_path, with_track, out_dir, cfg);
        if (eval->parsed()) {
            if (eval->count("--theta-mm"))
                theta_mm = eval->get_option("--theta-mm")->as<double>();
            return cmd_eval(seq_dir, trajectory_path, masks_dir, theta_px, theta_mm, out_dir, cfg);
        }
        if (score->parsed()) return cmd_score(seq_dir, out_dir, cfg);
        if (sweep->parsed()) return cmd_sweep(seq_dir, candidates_path, out_dir, cfg);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
