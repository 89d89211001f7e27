// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace skullid {
namespace {

using testing::small_subject;

MatchConfig strict_config() {
    MatchConfig cfg;
    cfg.decision_threshold = MatchConfig::kStrictThreshold;
    return cfg;
}

TEST(MatchProbe, SelfMatchIsPerfect) {
    const ProbeScan scan = synth::generate_subject(small_subject(1));
    const MatchConfig cfg = strict_config();
    const TemplateRecord tmpl = make_template("A", scan, cfg);
    const Decision d = match_probe(scan, tmpl, cfg);
    EXPECT_TRUE(d.accepted);
    EXPECT_EQ(d.score.dice, 1.0);
    EXPECT_EQ(d.score.matched_count, 2 * occupied_count(tmpl.grid));
    EXPECT_EQ(d.score.probe_clipped, 0u);
    EXPECT_LT(d.landmark_residual_rms, 1e-9);
}

TEST(MatchProbe, LatticePreservingMotionKeepsPerfectScore) {
    const ProbeScan scan = synth::generate_subject(small_subject(2));
    const MatchConfig cfg = strict_config();
    const TemplateRecord tmpl = make_template("A", scan, cfg);

    Matrix3 quarter_z;
    quarter_z << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    const RigidTransform g{quarter_z, Point3(7, -3, 12)};
    ProbeScan moved{apply_transform(g, scan.cloud), apply_transform(g, scan.landmarks), {}};

    const Decision d = match_probe(moved, tmpl, cfg);
    EXPECT_EQ(d.score.dice, 1.0);
    EXPECT_TRUE(d.accepted);
    EXPECT_LT(rotation_angle_between(d.transform.rotation, quarter_z.transpose()), 1e-9);
}

TEST(MatchProbe, ImpostorScoresBelowGenuine) {
    MatchConfig cfg;
    std::vector<TemplateRecord> templates;
    std::vector<ProbeScan> scans;
    for (std::uint64_t s = 1; s <= 11; ++s) {
        scans.push_back(synth::generate_subject(small_subject(s)));
        templates.push_back(make_template("S" + std::to_string(s), scans.back(), cfg));
    }
    // 10 probes per subject against the next subject: 100 genuine/impostor pairs.
    int pairs = 0;
    for (std::size_t i = 0; i + 1 < scans.size(); ++i) {
        for (std::uint64_t k = 0; k < 10; ++k) {
            const auto probe = synth::perturb(scans[i], {0.5, 1000 * i + k, 0.0}).scan;
            const double genuine = match_probe(probe, templates[i], cfg).score.dice;
            const double impostor = match_probe(probe, templates[i + 1], cfg).score.dice;
            ASSERT_GT(genuine, impostor) << "subject " << i << " probe " << k;
            ++pairs;
        }
    }
    EXPECT_EQ(pairs, 100);
}

TEST(MatchProbe, ResidualGateRejects) {
    const ProbeScan scan = synth::generate_subject(small_subject(3));
    MatchConfig cfg;
    cfg.decision_threshold = 0.0;
    cfg.max_landmark_residual = 2.0;
    const TemplateRecord tmpl = make_template("A", scan, cfg);

    ProbeScan bent = scan;
    bent.landmarks.apex += Point3(0, 0, 10);  // the triangle no longer fits rigidly
    const Decision d = match_probe(bent, tmpl, cfg);
    EXPECT_GT(d.landmark_residual_rms, 2.0);
    EXPECT_FALSE(d.accepted);
}

TEST(MatchProbe, ErrorsPropagate) {
    const ProbeScan scan = synth::generate_subject(small_subject(4));
    const MatchConfig cfg;
    const TemplateRecord tmpl = make_template("A", scan, cfg);

    ProbeScan degenerate = scan;
    degenerate.landmarks.apex = 0.5 * (degenerate.landmarks.left + degenerate.landmarks.right);
    try {
        match_probe(degenerate, tmpl, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateLandmarks);
    }

    // Cloud far from its own landmarks lands entirely outside the template grid.
    ProbeScan wrong_units = scan;
    for (auto& p : wrong_units.cloud.points) p *= 1000.0;
    wrong_units.cloud.points.erase(
        std::remove_if(wrong_units.cloud.points.begin(), wrong_units.cloud.points.end(),
                       [](const Point3& p) { return p.norm() < 5000.0; }),
        wrong_units.cloud.points.end());
    try {
        match_probe(wrong_units, tmpl, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AllPointsClipped);
    }
}

TEST(MatchProbe, PartialClippingIsReported) {
    const ProbeScan scan = synth::generate_subject(small_subject(5));
    const MatchConfig cfg;
    const TemplateRecord tmpl = make_template("A", scan, cfg);
    ProbeScan probe = scan;
    probe.cloud.points.emplace_back(500, 500, 500);
    const Decision d = match_probe(probe, tmpl, cfg);
    EXPECT_EQ(d.score.probe_clipped, 1u);
    EXPECT_EQ(d.score.dice, 1.0);
}

TEST(MatchProbe, DeterministicAndPoseInvariantAlignment) {
    const ProbeScan scan = synth::generate_subject(small_subject(6));
    const MatchConfig cfg;
    const TemplateRecord tmpl = make_template("A", scan, cfg);
    const ProbeScan probe = synth::perturb(scan, {0.5, 77, 0.3}).scan;

    const Decision first = match_probe(probe, tmpl, cfg);
    const Decision second = match_probe(probe, tmpl, cfg);
    EXPECT_EQ(first.score, second.score);
    EXPECT_EQ(first.transform.rotation, second.transform.rotation);
    EXPECT_EQ(first.landmark_residual_rms, second.landmark_residual_rms);

    synth::Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const RigidTransform g = testing::random_rigid(rng);
        const ProbeScan moved{apply_transform(g, probe.cloud), apply_transform(g, probe.landmarks), {}};
        const Decision d = match_probe(moved, tmpl, cfg);
        EXPECT_NEAR(d.landmark_residual_rms, first.landmark_residual_rms, 1e-9);
        const RigidTransform composite = compose(d.transform, g);
        EXPECT_LT(rotation_angle_between(composite.rotation, first.transform.rotation), 1e-9);
        EXPECT_LT((composite.translation - first.transform.translation).norm(), 1e-9);
        // General rotations move points across voxel boundaries only by rounding.
        EXPECT_NEAR(d.score.dice, first.score.dice, 1e-3);
    }
}

TEST(MatchProbe, RaisingThresholdNeverAccepts) {
    const ProbeScan scan = synth::generate_subject(small_subject(7));
    MatchConfig cfg;
    const TemplateRecord tmpl = make_template("A", scan, cfg);
    const ProbeScan probe = synth::perturb(scan, {0.3, 5, 0.0}).scan;
    bool was_rejected = false;
    for (int i = 0; i <= 100; ++i) {
        cfg.decision_threshold = i / 100.0;
        const bool accepted = match_probe(probe, tmpl, cfg).accepted;
        if (was_rejected) ASSERT_FALSE(accepted) << "threshold " << cfg.decision_threshold;
        was_rejected = was_rejected || !accepted;
    }
    EXPECT_TRUE(was_rejected);
}

TEST(MatchConfig, Validation) {
    MatchConfig cfg;
    cfg.decision_threshold = 1.5;
    EXPECT_THROW(require_valid(cfg), Error);
    cfg = {};
    cfg.voxel_size = 0.0;
    EXPECT_THROW(require_valid(cfg), Error);
    cfg = {};
    cfg.padding_voxels = -1;
    EXPECT_THROW(require_valid(cfg), Error);
}

}  // namespace
}  // namespace skullid
