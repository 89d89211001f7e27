// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace skullid {
namespace {

using testing::CommandResult;
using testing::run_command;
using testing::TempDir;

const std::string kCli = SKULLID_CLI_PATH;

std::string shell_arg(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

/// Writes a small synthetic scan to DIR/NAME.xyz and DIR/NAME.lmk.
ProbeScan write_scan(const TempDir& dir, const std::string& name, const ProbeScan& scan) {
    io::write_cloud(dir / (name + ".xyz"), scan.cloud);
    io::write_landmarks(dir / (name + ".lmk"), scan.landmarks);
    return scan;
}

std::string scan_flags(const TempDir& dir, const std::string& name) {
    return " --scan " + shell_arg(dir / (name + ".xyz")) + " --landmarks " + shell_arg(dir / (name + ".lmk"));
}

TEST(Cli, DemoSquares) {
    const CommandResult a = run_command(kCli + " demo-squares", false);
    EXPECT_EQ(a.exit_code, 0);
    EXPECT_EQ(a.out,
              "coincident: matched=20000 dice=1.000 SAME\n"
              "half-shift: matched=10000 dice=0.500 DIFFERENT\n");
    const CommandResult b = run_command(kCli + " demo-squares", false);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, EnrollThenVerifySameScan) {
    TempDir dir;
    write_scan(dir, "a", synth::generate_subject(testing::small_subject(1)));
    const auto gallery = shell_arg(dir / "gallery");

    const auto enroll = run_command(kCli + " enroll --gallery " + gallery + " --subject A" + scan_flags(dir, "a"));
    ASSERT_EQ(enroll.exit_code, 0) << enroll.out;

    const auto verify =
        run_command(kCli + " verify --gallery " + gallery + " --subject A" + scan_flags(dir, "a"), false);
    EXPECT_EQ(verify.exit_code, 0);
    EXPECT_EQ(verify.out.rfind("ACCEPT dice=1.000", 0), 0u) << verify.out;

    const auto strict =
        run_command(kCli + " verify --strict --gallery " + gallery + " --subject A" + scan_flags(dir, "a"), false);
    EXPECT_EQ(strict.exit_code, 0);
}

TEST(Cli, DecisionLineFormat) {
    TempDir dir;
    const auto scan = synth::generate_subject(testing::small_subject(2));
    write_scan(dir, "a", scan);
    write_scan(dir, "p", synth::perturb(scan, {0.5, 4, 0.0}).scan);
    const auto gallery = shell_arg(dir / "g");
    ASSERT_EQ(run_command(kCli + " enroll --gallery " + gallery + " --subject A" + scan_flags(dir, "a")).exit_code, 0);

    const auto out = run_command(kCli + " verify --gallery " + gallery + " --subject A" + scan_flags(dir, "p"), false);
    const Gallery g = Gallery::load(dir / "g");
    ProbeScan probe{io::read_cloud(dir / "p.xyz"), io::read_landmarks(dir / "p.lmk"), {}};
    const Decision d = g.verify("A", probe);
    char expected[160];
    std::snprintf(expected, sizeof expected, "%s dice=%.6f matched=%llu residual_mm=%.6f\n",
                  d.accepted ? "ACCEPT" : "REJECT", d.score.dice,
                  static_cast<unsigned long long>(d.score.matched_count), d.landmark_residual_rms);
    EXPECT_EQ(out.out, expected);
    EXPECT_EQ(out.exit_code, d.accepted ? 0 : 1);
}

TEST(Cli, RejectExitsOne) {
    TempDir dir;
    write_scan(dir, "a", synth::generate_subject(testing::small_subject(3)));
    write_scan(dir, "b", synth::generate_subject(testing::small_subject(4)));
    const auto gallery = shell_arg(dir / "g");
    ASSERT_EQ(run_command(kCli + " enroll --gallery " + gallery + " --subject A" + scan_flags(dir, "a")).exit_code, 0);

    const auto verify = run_command(kCli + " verify --gallery " + gallery + " --subject A" + scan_flags(dir, "b"), false);
    EXPECT_EQ(verify.exit_code, 1);
    EXPECT_EQ(verify.out.rfind("REJECT dice=", 0), 0u) << verify.out;

    const auto identify = run_command(kCli + " identify --gallery " + gallery + scan_flags(dir, "b"), false);
    EXPECT_EQ(identify.exit_code, 1);
    EXPECT_NE(first_line(identify.out).find(" subject=A"), std::string::npos);
}

TEST(Cli, IdentifyRanksEverySubject) {
    TempDir dir;
    const auto gallery = shell_arg(dir / "g");
    for (int i = 1; i <= 3; ++i) {
        const std::string name = "s" + std::to_string(i);
        write_scan(dir, name, synth::generate_subject(testing::small_subject(static_cast<std::uint64_t>(i))));
        ASSERT_EQ(run_command(kCli + " enroll --gallery " + gallery + " --subject " + dataset::subject_id(i) +
                              scan_flags(dir, name))
                      .exit_code,
                  0);
    }
    const auto out = run_command(kCli + " identify --gallery " + gallery + scan_flags(dir, "s2"), false);
    EXPECT_EQ(out.exit_code, 0);
    std::istringstream lines(out.out);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line.rfind("ACCEPT dice=1.000000", 0), 0u) << line;
    EXPECT_NE(line.find(" subject=S002"), std::string::npos);
    std::getline(lines, line);
    EXPECT_EQ(line.rfind("rank=1 subject=S002 dice=1.000000", 0), 0u) << line;
    int ranks = 1;
    while (std::getline(lines, line)) ranks += line.rfind("rank=", 0) == 0 ? 1 : 0;
    EXPECT_EQ(ranks, 3);
}

TEST(Cli, IdentifyEmptyGallery) {
    TempDir dir;
    write_scan(dir, "a", synth::generate_subject(testing::small_subject(5)));
    const auto gallery = shell_arg(dir / "g");
    ASSERT_EQ(run_command(kCli + " init --gallery " + gallery).exit_code, 0);
    const auto out = run_command(kCli + " identify --gallery " + gallery + scan_flags(dir, "a") + " 2>&1 >/dev/null", false);
    EXPECT_EQ(out.exit_code, 2);
    EXPECT_EQ(out.out, "error: empty gallery\n");
}

TEST(Cli, ErrorsExitTwo) {
    TempDir dir;
    write_scan(dir, "a", synth::generate_subject(testing::small_subject(6)));
    const auto gallery = shell_arg(dir / "g");

    const auto usage = run_command(kCli + " verify --gallery " + gallery);
    EXPECT_EQ(usage.exit_code, 2);
    EXPECT_EQ(usage.out.rfind("error: usage:", 0), 0u) << usage.out;

    EXPECT_EQ(run_command(kCli).exit_code, 2);
    EXPECT_EQ(run_command(kCli + " enroll --gallery " + gallery + " --subject A --threshold 2" + scan_flags(dir, "a"))
                  .exit_code,
              2);

    const auto missing = run_command(kCli + " verify --gallery " + gallery + " --subject A" + scan_flags(dir, "a"));
    EXPECT_EQ(missing.exit_code, 2);
    EXPECT_EQ(missing.out.rfind("error: ", 0), 0u);

    ASSERT_EQ(run_command(kCli + " enroll --gallery " + gallery + " --subject A" + scan_flags(dir, "a")).exit_code, 0);
    const auto unknown = run_command(kCli + " verify --gallery " + gallery + " --subject B" + scan_flags(dir, "a"));
    EXPECT_EQ(unknown.exit_code, 2);
    EXPECT_EQ(unknown.out.rfind("error: unknown subject", 0), 0u) << unknown.out;

    const auto dup = run_command(kCli + " enroll --gallery " + gallery + " --subject A" + scan_flags(dir, "a"));
    EXPECT_EQ(dup.exit_code, 2);
    EXPECT_EQ(dup.out.rfind("error: duplicate subject", 0), 0u) << dup.out;

    const auto voxel = run_command(kCli + " verify --voxel-size 2 --gallery " + gallery + " --subject A" +
                                   scan_flags(dir, "a"));
    EXPECT_EQ(voxel.exit_code, 2);

    {
        std::ofstream bad(dir / "bad.xyz");
        bad << "1 2 3\n4 five 6\n";
    }
    const auto parse = run_command(kCli + " verify --gallery " + gallery + " --subject A --scan " +
                                   shell_arg(dir / "bad.xyz") + " --landmarks " + shell_arg(dir / "a.lmk"));
    EXPECT_EQ(parse.exit_code, 2);
    EXPECT_EQ(parse.out.rfind("error: parse error", 0), 0u) << parse.out;
    EXPECT_NE(parse.out.find(":2"), std::string::npos);
    EXPECT_EQ(std::count(parse.out.begin(), parse.out.end(), '\n'), 1);
}

TEST(Cli, DumpGridMatchesLibrary) {
    TempDir dir;
    const auto scan = write_scan(dir, "a", synth::generate_subject(testing::small_subject(7)));
    const auto gallery = shell_arg(dir / "g");
    ASSERT_EQ(run_command(kCli + " enroll --gallery " + gallery + " --subject A --dump-grid " +
                          shell_arg(dir / "a.grid") + scan_flags(dir, "a"))
                  .exit_code,
              0);
    std::ifstream in(dir / "a.grid", std::ios::binary);
    const VoxelGrid dumped = read_grid(in);
    EXPECT_EQ(dumped, make_template("A", scan, MatchConfig{}).grid);
}

TEST(Cli, GenWritesDataset) {
    TempDir dir;
    const auto out =
        run_command(kCli + " gen --out " + shell_arg(dir / "d") + " --subjects 2 --seed 7 --probes 2 --noise 0.25");
    ASSERT_EQ(out.exit_code, 0) << out.out;
    dataset::GenOptions opt;
    opt.subjects = 2;
    opt.seed = 7;
    opt.probes_per_subject = 2;
    opt.noise_sigma = 0.25;
    const auto subjects = dataset::make_subjects(opt);
    const auto probes = dataset::make_probes(opt, subjects);
    EXPECT_EQ(io::read_cloud(dir / "d" / "gallery" / "S002.xyz"), subjects[1].scan.cloud);
    const auto read = dataset::read_probes(dir / "d" / "probes");
    ASSERT_EQ(read.size(), probes.size());
    for (std::size_t i = 0; i < read.size(); ++i) {
        EXPECT_EQ(read[i].cloud, probes[i].scan.cloud);
        EXPECT_EQ(read[i].landmarks, probes[i].scan.landmarks);
        EXPECT_EQ(read[i].label, probes[i].scan.label);
    }
}

TEST(Cli, EvalWritesReport) {
    TempDir dir;
    ASSERT_EQ(run_command(kCli + " gen --out " + shell_arg(dir / "d") + " --subjects 2 --probes 2").exit_code, 0);
    const auto gallery = shell_arg(dir / "g");
    for (const char* id : {"S001", "S002"}) {
        const auto base = dir / "d" / "gallery" / id;
        ASSERT_EQ(run_command(kCli + " enroll --gallery " + gallery + " --subject " + id + " --scan " +
                              shell_arg(base.string() + ".xyz") + " --landmarks " + shell_arg(base.string() + ".lmk"))
                      .exit_code,
                  0);
    }
    const auto eval = run_command(kCli + " eval --gallery " + gallery + " --trials " + shell_arg(dir / "d" / "probes") +
                                      " --thresholds 0:1:0.25 --report " + shell_arg(dir / "r.csv"),
                                  false);
    ASSERT_EQ(eval.exit_code, 0) << eval.out;
    EXPECT_EQ(eval.out.rfind("genuine_trials=4 impostor_trials=4\n", 0), 0u) << eval.out;
    std::ifstream csv(dir / "r.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "threshold,far,frr,genuine_accepts,impostor_accepts");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    EXPECT_EQ(rows, 5);
}

}  // namespace
}  // namespace skullid
