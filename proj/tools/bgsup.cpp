// bgsup: background suppression pipeline for grayscale frame stacks.
//
//   bgsup synth     --out DIR                      synthetic moving-shadow video
//   bgsup decompose --manifest M.json --out DIR    B/X/E decomposition
//   bgsup detect    --in DIR --out dets.json       shadow boxes from X
//   bgsup evaluate  --detections D --annotations A VOC-style scoring
//   bgsup entropy   FILE...                        gray-level entropy
//   bgsup contrast  FILE... --roi x,y,w,h          4-neighborhood contrast

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bgsup/commands.hpp"

namespace {

template <typename T>
std::vector<T> split_numbers(const std::string& text, std::size_t expected,
                             const std::string& flag) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) throw CLI::ValidationError(flag, "bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.size() != expected) {
        throw CLI::ValidationError(flag, "expected " + std::to_string(expected) +
                                             " comma-separated values");
    }
    return out;
}

bgsup::BoundingBox parse_roi(const std::string& text) {
    const auto v = split_numbers<long long>(text, 4, "--roi");
    if (v[2] < 1 || v[3] < 1) throw CLI::ValidationError("--roi", "w and h must be >= 1");
    return {v[0], v[1], v[2], v[3]};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank background suppression and shadow detection for frame stacks"};
    app.require_subcommand(1);

    // decompose
    bgsup::DecomposeOptions dec;
    double xi = 0, gamma = 0, mu0 = 0, mu_max = 0;
    auto* decompose = app.add_subcommand("decompose", "Split a frame stack into B + X + E");
    decompose->add_option("--manifest", dec.manifest, "Input manifest JSON")->required();
    decompose->add_option("--out", dec.out_dir, "Output directory")->required();
    auto* xi_opt = decompose->add_option("--xi", xi, "Sparsity weight (default 1/sqrt(max(m,n)))");
    auto* gamma_opt = decompose->add_option("--gamma", gamma, "Noise weight");
    decompose->add_option("--rho", dec.solver.rho, "Penalty growth factor (> 1)")
        ->capture_default_str();
    auto* mu0_opt = decompose->add_option("--mu0", mu0, "Initial penalty (default 1.25/sigma_1)");
    auto* mu_max_opt = decompose->add_option("--mu-max", mu_max, "Penalty cap (default 1e7*mu0)");
    decompose->add_option("--tol", dec.solver.tol, "Relative residual tolerance")
        ->capture_default_str();
    decompose->add_option("--max-iter", dec.solver.max_iter, "Iteration cap")
        ->capture_default_str();

    // detect
    bgsup::DetectOptions det;
    double tau = 0;
    auto* detect = app.add_subcommand("detect", "Detect dark shadows in the foreground");
    detect->add_option("--in", det.input_dir, "Directory written by decompose")->required();
    detect->add_option("--out", det.out_file, "Detections JSON")->required();
    auto* tau_opt = detect->add_option("--tau", tau, "Threshold (default adaptive per frame)");
    detect->add_option("--min-area", det.detector.min_area, "Minimum component area")
        ->capture_default_str();
    detect->add_option("--connectivity", det.detector.connectivity, "4 or 8")
        ->check(CLI::IsMember({4, 8}))
        ->capture_default_str();

    // evaluate
    bgsup::EvaluateOptions ev;
    std::string counts;
    std::string eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "Score detections against annotations");
    auto* dets_opt = evaluate->add_option("--detections", ev.detections, "Detections JSON");
    auto* ann_opt = evaluate->add_option("--annotations", ev.annotations, "Annotations JSON");
    auto* counts_opt =
        evaluate->add_option("--counts", counts, "Pre-matched TP,FP,FN instead of files");
    evaluate->add_option("--iou", ev.iou, "IoU threshold")->capture_default_str();
    evaluate->add_option("--out", eval_out, "Report JSON");
    dets_opt->excludes(counts_opt);
    ann_opt->excludes(counts_opt);

    // entropy / contrast
    bgsup::ImageMetricOptions ent;
    auto* entropy = app.add_subcommand("entropy", "Gray-level entropy of graymap files");
    entropy->add_option("files", ent.files, "PGM files")->required();
    entropy->add_flag("--stretch", ent.stretch, "Min-max stretch before quantizing");

    bgsup::ImageMetricOptions con;
    std::string roi;
    auto* contrast = app.add_subcommand("contrast", "4-neighborhood contrast inside an ROI");
    contrast->add_option("files", con.files, "PGM files")->required();
    contrast->add_option("--roi", roi, "x,y,w,h")->required();
    contrast->add_flag("--stretch", con.stretch, "Min-max stretch before quantizing");

    // synth
    bgsup::SynthOptions syn;
    auto* synth = app.add_subcommand("synth", "Write a synthetic moving-shadow video");
    synth->add_option("--out", syn.out_dir, "Output directory")->required();
    synth->add_option("--frames", syn.params.frames)->capture_default_str();
    synth->add_option("--height", syn.params.height)->capture_default_str();
    synth->add_option("--width", syn.params.width)->capture_default_str();
    synth->add_option("--block", syn.params.block)->capture_default_str();
    synth->add_option("--noise", syn.params.noise_sigma)->capture_default_str();
    synth->add_option("--seed", syn.params.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
        if (*xi_opt) dec.solver.xi = xi;
        if (*gamma_opt) dec.solver.gamma = gamma;
        if (*mu0_opt) dec.solver.mu0 = mu0;
        if (*mu_max_opt) dec.solver.mu_max = mu_max;
        if (*tau_opt) det.detector.tau = tau;
        if (*counts_opt) {
            const auto v = split_numbers<std::size_t>(counts, 3, "--counts");
            ev.counts = std::array<std::size_t, 3>{v[0], v[1], v[2]};
        } else if (evaluate->parsed() && (!*dets_opt || !*ann_opt)) {
            throw CLI::RequiredError("--detections and --annotations (or --counts)");
        }
        if (!eval_out.empty()) ev.out_file = eval_out;
        if (contrast->parsed()) con.roi = parse_roi(roi);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*decompose) return bgsup::cmd_decompose(dec, std::cout, std::cerr);
    if (*detect) return bgsup::cmd_detect(det, std::cout, std::cerr);
    if (*evaluate) return bgsup::cmd_evaluate(ev, std::cout, std::cerr);
    if (*entropy) return bgsup::cmd_entropy(ent, std::cout, std::cerr);
    if (*contrast) return bgsup::cmd_contrast(con, std::cout, std::cerr);
    if (*synth) return bgsup::cmd_synth(syn, std::cout, std::cerr);
    return 1;
}
