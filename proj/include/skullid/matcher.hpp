// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_MATCHER_HPP
#define SKULLID_MATCHER_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "skullid/error.hpp"
#include "skullid/geometry.hpp"
#include "skullid/voxel.hpp"

namespace skullid {

struct ProbeScan {
    PointCloud cloud;
    LandmarkTriple landmarks;
    /// Ground-truth subject, used only by evaluation.
    std::optional<std::string> label;
};

struct MatchConfig {
    double voxel_size = 1.0;            // mm
    int padding_voxels = 2;
    double decision_threshold = 0.90;   // Dice
    double max_landmark_residual = 2.0; // mm

    /// Literal equal-pixel-count rule: only a perfect overlap is accepted.
    static constexpr double kStrictThreshold = 1.0;

    bool operator==(const MatchConfig&) const = default;
};

inline void require_valid(const MatchConfig& cfg) {
    if (!(cfg.voxel_size > 0.0) || !std::isfinite(cfg.voxel_size)) {
        throw Error(ErrorCode::InvalidArgument, "voxel_size must be positive");
    }
    if (cfg.padding_voxels < 0) throw Error(ErrorCode::InvalidArgument, "padding_voxels must be >= 0");
    if (!(cfg.decision_threshold >= 0.0 && cfg.decision_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "decision_threshold must lie in [0,1]");
    }
    if (!(cfg.max_landmark_residual >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "max_landmark_residual must be >= 0");
    }
}

/// An enrolled subject. `grid` is the cached rasterization of `cloud` on the
/// padded bounding box under the enrolling configuration.
struct TemplateRecord {
    std::string subject_id;
    PointCloud cloud;
    LandmarkTriple landmarks;
    VoxelGrid grid{GridSpec{}};
    std::int64_t enrolled_at = 0;  // unix seconds

    bool operator==(const TemplateRecord& o) const {
        return subject_id == o.subject_id && cloud == o.cloud && landmarks == o.landmarks && grid == o.grid &&
               enrolled_at == o.enrolled_at;
    }
};

inline TemplateRecord make_template(std::string subject_id, const ProbeScan& scan, const MatchConfig& cfg,
                                    std::int64_t enrolled_at = 0) {
    require_valid(cfg);
    require_valid(scan.landmarks, "template landmarks");
    const GridSpec spec = grid_around(scan.cloud, cfg.voxel_size, cfg.padding_voxels);
    return TemplateRecord{std::move(subject_id), scan.cloud, scan.landmarks, voxelize(scan.cloud, spec).grid,
                          enrolled_at};
}

struct Decision {
    bool accepted = false;
    MatchScore score;
    double landmark_residual_rms = 0.0;
    /// Probe frame to template frame.
    RigidTransform transform;
};

inline bool decide(const MatchScore& score, double residual, const MatchConfig& cfg) {
    return score.dice >= cfg.decision_threshold && residual <= cfg.max_landmark_residual;
}

struct MatchTrace {
    Decision decision;
    VoxelGrid probe_grid;
};

/// Landmark alignment, then rasterization into the template's grid, then
/// scoring. The probe grid is kept for diagnostics.
inline MatchTrace match_probe_traced(const ProbeScan& probe, const TemplateRecord& tmpl, const MatchConfig& cfg) {
    require_valid(cfg);
    const Registration reg = rigid_from_landmarks(probe.landmarks, tmpl.landmarks);
    const PointCloud aligned = apply_transform(reg.transform, probe.cloud);
    Voxelized vox = voxelize(aligned, tmpl.grid.spec());

    Decision d;
    d.score = similarity(tmpl.grid, vox.grid);
    d.score.probe_clipped = vox.clipped;
    d.landmark_residual_rms = reg.residual_rms;
    d.transform = reg.transform;
    d.accepted = decide(d.score, d.landmark_residual_rms, cfg);
    return MatchTrace{d, std::move(vox.grid)};
}

inline Decision match_probe(const ProbeScan& probe, const TemplateRecord& tmpl, const MatchConfig& cfg) {
    return match_probe_traced(probe, tmpl, cfg).decision;
}

}  // namespace skullid

#endif  // SKULLID_MATCHER_HPP
