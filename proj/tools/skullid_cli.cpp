// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

// skullid: command-line front end for enrollment, identification,
// verification, evaluation and synthetic data generation.
//
// Exit codes: 0 success / accept, 1 reject, 2 usage or data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skullid/skullid.hpp"

namespace fs = std::filesystem;
using namespace skullid;

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitError = 2;

struct Options {
    std::string gallery_dir;
    std::string subject;
    std::string scan;
    std::string landmarks;
    std::string dump_grid;
    std::optional<double> voxel_size;
    std::optional<int> padding;
    std::optional<double> threshold;
    std::optional<double> max_residual;
    bool strict = false;

    // gen
    std::string out_dir;
    int subjects = 20;
    std::uint64_t seed = 1;
    double noise = 0.5;
    double jitter = 0.0;
    int probes = 5;

    // eval
    std::string trials_dir;
    std::string thresholds = "0:1:0.01";
    std::string report;
};

std::string decision_line(bool accepted, const MatchScore& s, double residual) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s dice=%.6f matched=%llu residual_mm=%.6f", accepted ? "ACCEPT" : "REJECT", s.dice,
                  static_cast<unsigned long long>(s.matched_count), residual);
    return buf;
}

std::optional<double> effective_threshold(const Options& o) {
    if (o.strict) return MatchConfig::kStrictThreshold;
    return o.threshold;
}

void dump_grid(const std::string& path, const VoxelGrid& grid) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    write_grid(out, grid);
}

ProbeScan read_scan(const Options& o) {
    ProbeScan p;
    p.cloud = io::read_cloud(o.scan);
    p.landmarks = io::read_landmarks(fs::path(o.landmarks));
    return p;
}

/// Loads the gallery and applies decision overrides. Geometry flags must
/// agree with what the gallery was enrolled under.
Gallery open_gallery(const Options& o) {
    Gallery g = Gallery::load(o.gallery_dir);
    if (o.voxel_size && *o.voxel_size != g.config().voxel_size) {
        throw Error(ErrorCode::InvalidArgument, "--voxel-size differs from the gallery's; re-enroll to change it");
    }
    const auto t = effective_threshold(o);
    g.set_decision(t.value_or(g.config().decision_threshold), o.max_residual.value_or(g.config().max_landmark_residual));
    return g;
}

MatchConfig config_from(const Options& o) {
    MatchConfig cfg;
    if (o.voxel_size) cfg.voxel_size = *o.voxel_size;
    if (o.padding) cfg.padding_voxels = *o.padding;
    if (const auto t = effective_threshold(o)) cfg.decision_threshold = *t;
    if (o.max_residual) cfg.max_landmark_residual = *o.max_residual;
    require_valid(cfg);
    return cfg;
}

int cmd_demo_squares() {
    const auto demo = demo::run_squares();
    std::cout << demo::format_line("coincident", demo.coincident) << '\n';
    std::cout << demo::format_line("half-shift", demo.half_shift) << '\n';
    const bool exact = demo.coincident.matched_count == 20000 && demo.coincident.dice == 1.0 &&
                       demo.half_shift.matched_count == 10000 && demo.half_shift.dice == 0.5;
    return exact ? kExitAccept : kExitError;
}

int cmd_gen(const Options& o) {
    dataset::GenOptions opt;
    opt.subjects = o.subjects;
    opt.seed = o.seed;
    opt.noise_sigma = o.noise;
    opt.landmark_jitter_sigma = o.jitter;
    opt.probes_per_subject = o.probes;
    dataset::write_dataset(o.out_dir, opt);
    std::cout << "wrote " << opt.subjects << " subjects and " << opt.subjects * opt.probes_per_subject
              << " probes to " << o.out_dir << '\n';
    return kExitAccept;
}

int cmd_init(const Options& o) {
    if (fs::exists(fs::path(o.gallery_dir) / kManifestName)) {
        throw Error(ErrorCode::InvalidArgument, "gallery already exists at " + o.gallery_dir);
    }
    Gallery(config_from(o)).save(o.gallery_dir);
    std::cout << "initialized " << o.gallery_dir << '\n';
    return kExitAccept;
}

int cmd_enroll(const Options& o) {
    const bool exists = fs::exists(fs::path(o.gallery_dir) / kManifestName);
    Gallery g = exists ? open_gallery(o) : Gallery(config_from(o));
    ProbeScan scan = read_scan(o);
    const TemplateRecord& rec = g.enroll(o.subject, scan);
    dump_grid(o.dump_grid, rec.grid);
    g.save(o.gallery_dir);
    std::cout << "enrolled " << o.subject << " voxels=" << occupied_count(rec.grid) << '\n';
    return kExitAccept;
}

int cmd_verify(const Options& o) {
    const Gallery g = open_gallery(o);
    const MatchTrace trace = match_probe_traced(read_scan(o), g.at(o.subject), g.config());
    dump_grid(o.dump_grid, trace.probe_grid);
    const Decision& d = trace.decision;
    std::cout << decision_line(d.accepted, d.score, d.landmark_residual_rms) << '\n';
    return d.accepted ? kExitAccept : kExitReject;
}

int cmd_identify(const Options& o) {
    const Gallery g = open_gallery(o);
    const ProbeScan probe = read_scan(o);
    const IdentifyResult r = g.identify(probe);
    const RankedScore& top = r.ranked.front();
    if (!o.dump_grid.empty()) {
        dump_grid(o.dump_grid, match_probe_traced(probe, g.at(top.subject_id), g.config()).probe_grid);
    }
    std::cout << decision_line(r.best_accepted.has_value(), top.score, top.landmark_residual_rms)
              << " subject=" << top.subject_id << '\n';
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "rank=%zu subject=%s dice=%.6f matched=%llu", i + 1,
                      r.ranked[i].subject_id.c_str(), r.ranked[i].score.dice,
                      static_cast<unsigned long long>(r.ranked[i].score.matched_count));
        std::cout << buf << '\n';
    }
    return r.best_accepted ? kExitAccept : kExitReject;
}

std::vector<double> parse_thresholds(const std::string& text) {
    std::vector<double> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ':') {
            parts.push_back(io::detail::parse_double(text.substr(start, i - start), "--thresholds", 1));
            start = i + 1;
        }
    }
    if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "--thresholds expects a:b:step");
    return threshold_range(parts[0], parts[1], parts[2]);
}

int cmd_eval(const Options& o) {
    const Gallery g = open_gallery(o);
    if (g.empty()) throw Error(ErrorCode::EmptyGallery);
    const auto thresholds = parse_thresholds(o.thresholds);
    const auto probes = dataset::read_probes(o.trials_dir);
    const auto trials = dataset::cross_trials(g, probes);
    const auto scored = run_trials(g, trials);
    EvalReport rep = sweep(scored, thresholds);
    rep.rank1_accuracy = rank1(g, probes, rep.eer_threshold);
    if (!o.report.empty()) {
        std::ofstream out(o.report, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + o.report);
        write_csv(out, rep);
    }
    write_summary(std::cout, rep);
    return kExitAccept;
}

void add_scan_flags(CLI::App* sub, Options& o) {
    sub->add_option("--scan", o.scan, "Probe point cloud (.xyz or ASCII .ply)")->required();
    sub->add_option("--landmarks", o.landmarks, "Landmark file (.lmk)")->required();
}

void add_decision_flags(CLI::App* sub, Options& o) {
    sub->add_option("--voxel-size", o.voxel_size, "Voxel edge in mm");
    sub->add_option("--threshold", o.threshold, "Dice acceptance threshold in [0,1]");
    sub->add_option("--max-residual", o.max_residual, "Landmark residual gate in mm");
    sub->add_flag("--strict", o.strict, "Accept only a perfect pixel match (threshold 1.0)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skullid - landmark-aligned voxel matching of 3D scans"};
    app.require_subcommand(1);
    Options o;

    auto* demo = app.add_subcommand("demo-squares", "Matched-pixel counts for two 100x100 squares");

    auto* gen = app.add_subcommand("gen", "Write a synthetic dataset");
    gen->add_option("--out", o.out_dir, "Output directory")->required();
    gen->add_option("--subjects", o.subjects, "Number of subjects")->check(CLI::PositiveNumber);
    gen->add_option("--seed", o.seed, "First subject seed");
    gen->add_option("--noise", o.noise, "Probe noise sigma in mm")->check(CLI::NonNegativeNumber);
    gen->add_option("--jitter", o.jitter, "Probe landmark jitter sigma in mm")->check(CLI::NonNegativeNumber);
    gen->add_option("--probes", o.probes, "Probes per subject")->check(CLI::NonNegativeNumber);

    auto* init = app.add_subcommand("init", "Create an empty gallery");
    init->add_option("--gallery", o.gallery_dir, "Gallery directory")->required();
    init->add_option("--padding", o.padding, "Grid padding in voxels");
    add_decision_flags(init, o);

    auto* enroll = app.add_subcommand("enroll", "Enroll a subject (creates the gallery if needed)");
    enroll->add_option("--gallery", o.gallery_dir, "Gallery directory")->required();
    enroll->add_option("--subject", o.subject, "Subject id")->required();
    enroll->add_option("--padding", o.padding, "Grid padding in voxels (new gallery only)");
    enroll->add_option("--dump-grid", o.dump_grid, "Write the template grid dump here");
    add_scan_flags(enroll, o);
    add_decision_flags(enroll, o);

    auto* identify = app.add_subcommand("identify", "Rank every enrolled subject against a probe");
    identify->add_option("--gallery", o.gallery_dir, "Gallery directory")->required();
    identify->add_option("--dump-grid", o.dump_grid, "Write the probe grid (top candidate's frame) here");
    add_scan_flags(identify, o);
    add_decision_flags(identify, o);

    auto* verify = app.add_subcommand("verify", "Check a probe against one claimed subject");
    verify->add_option("--gallery", o.gallery_dir, "Gallery directory")->required();
    verify->add_option("--subject", o.subject, "Claimed subject id")->required();
    verify->add_option("--dump-grid", o.dump_grid, "Write the probe grid here");
    add_scan_flags(verify, o);
    add_decision_flags(verify, o);

    auto* eval = app.add_subcommand("eval", "Threshold sweep over every probe x subject claim");
    eval->add_option("--gallery", o.gallery_dir, "Gallery directory")->required();
    eval->add_option("--trials", o.trials_dir, "Directory holding probes.csv")->required();
    eval->add_option("--thresholds", o.thresholds, "Sweep as a:b:step");
    eval->add_option("--report", o.report, "CSV output path");
    add_decision_flags(eval, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (*demo) return cmd_demo_squares();
        if (*gen) return cmd_gen(o);
        if (*init) return cmd_init(o);
        if (*enroll) return cmd_enroll(o);
        if (*identify) return cmd_identify(o);
        if (*verify) return cmd_verify(o);
        if (*eval) return cmd_eval(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
