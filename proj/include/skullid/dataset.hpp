// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_DATASET_HPP
#define SKULLID_DATASET_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "skullid/error.hpp"
#include "skullid/evaluator.hpp"
#include "skullid/io.hpp"
#include "skullid/synth.hpp"

// On-disk synthetic dataset written by `skullid gen`:
//
//   DIR/gallery/<id>.xyz, <id>.lmk        canonical enrollment scans
//   DIR/probes/<id>_<k>.xyz, <id>_<k>.lmk  perturbed probes
//   DIR/probes/probes.csv                  scan,landmarks,label

namespace skullid::dataset {

inline constexpr const char* kProbeList = "probes.csv";

struct GenOptions {
    int subjects = 20;
    std::uint64_t seed = 1;  // subject i (1-based) uses seed + i - 1
    int probes_per_subject = 5;
    double noise_sigma = 0.5;
    double landmark_jitter_sigma = 0.0;
};

inline std::string subject_id(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%03d", index);
    return buf;
}

inline synth::SubjectParams subject_params(const GenOptions& opt, int index) {
    synth::SubjectParams p;
    p.seed = opt.seed + static_cast<std::uint64_t>(index - 1);
    return p;
}

inline synth::PerturbSpec probe_spec(const GenOptions& opt, int index, int probe) {
    std::uint64_t state = (opt.seed << 20) ^ (static_cast<std::uint64_t>(index) << 8) ^ static_cast<std::uint64_t>(probe);
    synth::PerturbSpec s;
    s.noise_sigma = opt.noise_sigma;
    s.landmark_jitter_sigma = opt.landmark_jitter_sigma;
    s.pose_seed = synth::splitmix64_next(state);
    return s;
}

struct LabeledScan {
    std::string id;
    ProbeScan scan;
};

/// Enrollment scans, in subject order.
inline std::vector<LabeledScan> make_subjects(const GenOptions& opt) {
    std::vector<LabeledScan> out;
    for (int i = 1; i <= opt.subjects; ++i) {
        LabeledScan s{subject_id(i), synth::generate_subject(subject_params(opt, i))};
        s.scan.label = s.id;
        out.push_back(std::move(s));
    }
    return out;
}

/// Probes for every subject, subject-major.
inline std::vector<LabeledScan> make_probes(const GenOptions& opt, const std::vector<LabeledScan>& subjects) {
    std::vector<LabeledScan> out;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        for (int k = 0; k < opt.probes_per_subject; ++k) {
            const auto spec = probe_spec(opt, static_cast<int>(i) + 1, k);
            LabeledScan p{subjects[i].id + "_" + std::to_string(k), synth::perturb(subjects[i].scan, spec).scan};
            p.scan.label = subjects[i].id;
            out.push_back(std::move(p));
        }
    }
    return out;
}

inline void write_dataset(const std::filesystem::path& dir, const GenOptions& opt) {
    namespace fs = std::filesystem;
    if (opt.subjects < 1) throw Error(ErrorCode::InvalidArgument, "need at least one subject");
    if (opt.probes_per_subject < 0) throw Error(ErrorCode::InvalidArgument, "probes must be >= 0");
    std::error_code ec;
    fs::create_directories(dir / "gallery", ec);
    fs::create_directories(dir / "probes", ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());

    const auto subjects = make_subjects(opt);
    for (const auto& s : subjects) {
        io::write_cloud(dir / "gallery" / (s.id + ".xyz"), s.scan.cloud);
        io::write_landmarks(dir / "gallery" / (s.id + ".lmk"), s.scan.landmarks);
    }
    auto list = io::detail::open_out(dir / "probes" / kProbeList);
    list << "scan,landmarks,label\n";
    for (const auto& p : make_probes(opt, subjects)) {
        io::write_cloud(dir / "probes" / (p.id + ".xyz"), p.scan.cloud);
        io::write_landmarks(dir / "probes" / (p.id + ".lmk"), p.scan.landmarks);
        list << p.id << ".xyz," << p.id << ".lmk," << *p.scan.label << '\n';
    }
    if (!list) throw Error(ErrorCode::IoError, "failed writing probe list");
}

/// Reads `DIR/probes.csv`; file paths are relative to DIR.
inline std::vector<ProbeScan> read_probes(const std::filesystem::path& dir) {
    const auto list_path = dir / kProbeList;
    auto in = io::detail::open_in(list_path);
    std::vector<ProbeScan> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = io::detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line_no == 1 && line == "scan,landmarks,label") continue;
        const auto tok = io::detail::split(line, ',');
        if (tok.size() != 3 || tok[0].empty() || tok[1].empty() || tok[2].empty()) {
            throw Error(ErrorCode::ParseError, list_path.string() + ":" + std::to_string(line_no) +
                                                   ": expected scan,landmarks,label");
        }
        ProbeScan p;
        p.cloud = io::read_cloud(dir / std::string(tok[0]));
        p.landmarks = io::read_landmarks(dir / std::string(tok[1]));
        p.label = std::string(tok[2]);
        out.push_back(std::move(p));
    }
    return out;
}

/// Every probe claimed against every enrolled subject, probe-major.
inline std::vector<Trial> cross_trials(const Gallery& g, const std::vector<ProbeScan>& probes) {
    std::vector<Trial> out;
    out.reserve(probes.size() * g.size());
    for (const auto& p : probes) {
        const auto shared = std::make_shared<const ProbeScan>(p);
        for (const auto& [id, rec] : g.records()) out.push_back(Trial{shared, id});
    }
    return out;
}

}  // namespace skullid::dataset

#endif  // SKULLID_DATASET_HPP
