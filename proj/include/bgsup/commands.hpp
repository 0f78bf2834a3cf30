#pragma once

// Subcommand implementations behind the `bgsup` executable. Each returns a
// process exit status and reports through the supplied streams, so they can
// be driven from tests without spawning a process.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bgsup/detect.hpp"
#include "bgsup/error.hpp"
#include "bgsup/framestack.hpp"
#include "bgsup/io.hpp"
#include "bgsup/metrics.hpp"
#include "bgsup/pgm.hpp"
#include "bgsup/solver.hpp"
#include "bgsup/synthetic.hpp"

namespace bgsup {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;

inline constexpr std::uint32_t kExportMaxval = 65535;

/// [0, 1] -> 16-bit level, clamping.
inline std::uint32_t encode_unit_level(double v) {
    return static_cast<std::uint32_t>(std::lround(std::clamp(v, 0.0, 1.0) * kExportMaxval));
}

/// Signed value in [-1, 1] -> 16-bit level via (v + 1) / 2.
inline std::uint32_t encode_signed_level(double v) {
    return encode_unit_level((v + 1.0) / 2.0);
}

inline double decode_signed_level(std::uint32_t level) {
    return 2.0 * static_cast<double>(level) / kExportMaxval - 1.0;
}

namespace detail {

inline std::string frame_name(std::size_t j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04zu.pgm", j);
    return buf;
}

/// Merges one command's section into <dir>/run-config.json.
inline void record_run_config(const fs::path& dir, const std::string& command,
                              const json& section) {
    const fs::path path = dir / "run-config.json";
    json doc = json::object();
    if (fs::exists(path)) {
        try {
            doc = parse_json_file(path);
        } catch (const InputError&) {
            doc = json::object();
        }
        if (!doc.is_object()) doc = json::object();
    }
    doc[command] = section;
    write_json(path, doc);
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline void export_frames(const fs::path& dir, const Matrix& m, std::size_t height,
                          std::size_t width, bool is_signed) {
    ensure_dir(dir);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        GrayImage img;
        img.height = height;
        img.width = width;
        img.maxval = kExportMaxval;
        img.samples.resize(height * width);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double v = m(i, j);
            img.samples[static_cast<std::size_t>(i)] =
                is_signed ? encode_signed_level(v) : encode_unit_level(v);
        }
        write_pgm(dir / frame_name(static_cast<std::size_t>(j)), img);
    }
}

inline std::string optional_json_note(const std::optional<double>& v) {
    return v ? "explicit" : "auto";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// decompose

struct DecomposeOptions {
    fs::path manifest;
    fs::path out_dir;
    SolverConfig solver;
};

inline int cmd_decompose(const DecomposeOptions& opt, std::ostream& out, std::ostream& err) {
    std::string stage = "load";
    try {
        const Manifest manifest = read_manifest(opt.manifest);
        const FrameStack frames = load_frames(manifest);
        const Matrix d = stack(frames);

        stage = "solve";
        const DecompositionResult res = solve(d, opt.solver);

        stage = "export";
        detail::ensure_dir(opt.out_dir);
        const std::size_t h = frames.height();
        const std::size_t w = frames.width();
        detail::export_frames(opt.out_dir / "background", res.background, h, w, false);
        detail::export_frames(opt.out_dir / "foreground", res.foreground, h, w, true);
        detail::export_frames(opt.out_dir / "noise", res.noise, h, w, true);
        write_raw_matrix(opt.out_dir / "background.bin", res.background);
        write_raw_matrix(opt.out_dir / "foreground.bin", res.foreground);
        write_raw_matrix(opt.out_dir / "noise.bin", res.noise);
        write_file(opt.out_dir / "trace.csv", format_trace_csv(res.trace));

        const json unit_map = {{"encoding", "clamp"},
                               {"maxval", kExportMaxval},
                               {"value", "level / maxval"},
                               {"scale", 1.0},
                               {"offset", 0.0}};
        const json signed_map = {{"encoding", "affine"},
                                 {"maxval", kExportMaxval},
                                 {"value", "2 * level / maxval - 1"},
                                 {"scale", 2.0},
                                 {"offset", -1.0}};
        const json sidecar = {{"height", h},
                              {"width", w},
                              {"frames", frames.size()},
                              {"source_bit_depth", manifest.bit_depth},
                              {"converged", res.converged},
                              {"iterations", res.iterations},
                              {"final_residual", res.trace.empty() ? 0.0 : res.trace.back().residual},
                              {"background", unit_map},
                              {"foreground", signed_map},
                              {"noise", signed_map}};
        write_json(opt.out_dir / "decomposition.json", sidecar);

        json cfg = to_json(res.config);
        cfg["manifest"] = opt.manifest.string();
        cfg["mu0_source"] = detail::optional_json_note(opt.solver.mu0);
        cfg["xi_source"] = detail::optional_json_note(opt.solver.xi);
        cfg["gamma_source"] = detail::optional_json_note(opt.solver.gamma);
        detail::record_run_config(opt.out_dir, "decompose", cfg);

        out << "decomposed " << frames.size() << " frames of " << h << "x" << w << " in "
            << res.iterations << " iterations (" << (res.converged ? "converged" : "not converged")
            << ", residual " << std::scientific << std::setprecision(3)
            << (res.trace.empty() ? 0.0 : res.trace.back().residual) << ")\n";
        return kExitOk;
    } catch (const IoError& e) {
        err << "decompose: I/O error during " << stage << ": " << e.what() << "\n";
    } catch (const InputError& e) {
        err << "decompose: input/dimension error during " << stage << ": " << e.what() << "\n";
    } catch (const NumericError& e) {
        err << "decompose: numeric error during " << stage << ": " << e.what() << "\n";
    }
    return kExitFailure;
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
    fs::path input_dir;  // output of decompose
    fs::path out_file;
    DetectorConfig detector;
};

inline int cmd_detect(const DetectOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const json sidecar = parse_json_file(opt.input_dir / "decomposition.json");
        std::size_t h = 0, w = 0;
        try {
            h = sidecar.at("height").get<std::size_t>();
            w = sidecar.at("width").get<std::size_t>();
        } catch (const json::exception& e) {
            throw InputError(std::string("decomposition.json: ") + e.what());
        }
        const Matrix x = read_raw_matrix(opt.input_dir / "foreground.bin");
        const std::vector<Detection> dets = detect_shadows(x, h, w, opt.detector);

        fs::path dir = opt.out_file.parent_path();
        if (dir.empty()) dir = ".";
        detail::ensure_dir(dir);
        write_json(opt.out_file, to_json(dets));

        json cfg = {{"input", opt.input_dir.string()},
                    {"min_area", opt.detector.min_area},
                    {"connectivity", opt.detector.connectivity}};
        if (opt.detector.tau) {
            cfg["tau"] = *opt.detector.tau;
        } else {
            cfg["tau"] = "adaptive";
            cfg["tau_rule"] = "max(0.05, 3 * median(|X| nonzero)) per frame";
        }
        detail::record_run_config(dir, "detect", cfg);

        out << dets.size() << " detections over " << x.cols() << " frames\n";
        return kExitOk;
    } catch (const IoError& e) {
        err << "detect: I/O error: " << e.what() << "\n";
    } catch (const InputError& e) {
        err << "detect: input error: " << e.what() << "\n";
    }
    return kExitFailure;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
    fs::path detections;
    fs::path annotations;
    std::optional<fs::path> out_file;
    double iou = 0.5;
    // Pre-matched TP, FP, FN; replaces the detection/annotation files.
    std::optional<std::array<std::size_t, 3>> counts;
};

inline std::string format_percent(double fraction) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << fraction * 100.0;
    return os.str();
}

/// Header plus one row in the column order GT TP FP FN r(%) p(%) ap(%).
inline std::string format_report_table(std::size_t gt, std::size_t tp, std::size_t fp,
                                       std::size_t fn, double recall, double precision,
                                       std::optional<double> ap) {
    std::ostringstream os;
    os << "GT\tTP\tFP\tFN\tr(%)\tp(%)\tap(%)\n";
    os << gt << '\t' << tp << '\t' << fp << '\t' << fn << '\t' << format_percent(recall) << '\t'
       << format_percent(precision) << '\t' << (ap ? format_percent(*ap) : std::string("-"))
       << '\n';
    return os.str();
}

inline int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (!(opt.iou > 0.0 && opt.iou <= 1.0)) throw InputError("--iou must lie in (0, 1]");
        json section = {{"iou", opt.iou}};
        json report_doc;
        if (opt.counts) {
            const auto [tp, fp, fn] = *opt.counts;
            const auto rp = precision_recall(tp, fp, fn);
            out << format_report_table(tp + fn, tp, fp, fn, rp.recall, rp.precision, std::nullopt);
            report_doc = {{"gt_count", tp + fn}, {"tp", tp},  {"fp", fp},
                          {"fn", fn},            {"recall", rp.recall},
                          {"precision", rp.precision}};
            section["counts"] = {tp, fp, fn};
        } else {
            const auto dets = detections_from_json(parse_json_file(opt.detections));
            const auto gts = annotations_from_json(parse_json_file(opt.annotations));
            const EvalReport r = evaluate(dets, gts, opt.iou);
            out << format_report_table(r.gt_count, r.tp, r.fp, r.fn, r.recall, r.precision, r.ap);
            report_doc = to_json(r);
            section["detections"] = opt.detections.string();
            section["annotations"] = opt.annotations.string();
        }
        if (opt.out_file) {
            fs::path dir = opt.out_file->parent_path();
            if (dir.empty()) dir = ".";
            detail::ensure_dir(dir);
            write_json(*opt.out_file, report_doc);
            detail::record_run_config(dir, "evaluate", section);
        }
        return kExitOk;
    } catch (const IoError& e) {
        err << "evaluate: I/O error: " << e.what() << "\n";
    } catch (const InputError& e) {
        err << "evaluate: input error: " << e.what() << "\n";
    }
    return kExitFailure;
}

// ---------------------------------------------------------------------------
// entropy / contrast on graymap files

/// Reads a graymap as values in [0, 1] (sample / maxval).
inline Frame load_unit_frame(const fs::path& path) {
    const GrayImage img = read_pgm(path);
    Frame f(img.height, img.width);
    const double inv = 1.0 / static_cast<double>(img.maxval);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        f.pixels[i] = static_cast<double>(img.samples[i]) * inv;
    }
    return f;
}

struct ImageMetricOptions {
    std::vector<fs::path> files;
    bool stretch = false;
    std::optional<BoundingBox> roi;
};

inline int cmd_entropy(const ImageMetricOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        for (const auto& path : opt.files) {
            Frame f = load_unit_frame(path);
            if (opt.stretch) f = stretch_to_unit(f);
            out << path.string() << '\t' << std::fixed << std::setprecision(4)
                << information_entropy(f) << '\n';
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "entropy: " << e.what() << "\n";
    }
    return kExitFailure;
}

inline int cmd_contrast(const ImageMetricOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (!opt.roi) throw InputError("--roi x,y,w,h is required");
        for (const auto& path : opt.files) {
            Frame f = load_unit_frame(path);
            if (opt.stretch) f = stretch_to_unit(f);
            out << path.string() << '\t' << std::fixed << std::setprecision(4)
                << shadow_contrast(f, *opt.roi) << '\n';
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "contrast: " << e.what() << "\n";
    }
    return kExitFailure;
}

// ---------------------------------------------------------------------------
// synth: writes a moving-shadow test video with its manifest and annotations

struct SynthOptions {
    fs::path out_dir;
    MovingBlockParams params;
};

inline int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const SyntheticVideo video = make_moving_block_video(opt.params);
        detail::ensure_dir(opt.out_dir);
        json frames = json::array();
        for (std::size_t j = 0; j < video.levels.size(); ++j) {
            GrayImage img;
            img.height = opt.params.height;
            img.width = opt.params.width;
            img.maxval = 255;
            img.samples = video.levels[j];
            const std::string name = detail::frame_name(j);
            write_pgm(opt.out_dir / name, img);
            frames.push_back(name);
        }
        write_json(opt.out_dir / "manifest.json", {{"height", opt.params.height},
                                                   {"width", opt.params.width},
                                                   {"bit_depth", 8},
                                                   {"frames", frames}});
        write_json(opt.out_dir / "annotations.json", to_json(video.truth));
        out << "wrote " << video.levels.size() << " frames to " << opt.out_dir.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "synth: " << e.what() << "\n";
    }
    return kExitFailure;
}

}  // namespace bgsup
