// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_GEOMETRY_HPP
#define SKULLID_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "skullid/error.hpp"

namespace skullid {

/// A 3D coordinate in millimeters.
using Point3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

inline bool is_finite(const Point3& p) noexcept {
    return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

/// Ordered set of surface samples. Coordinates are millimeters throughout.
struct PointCloud {
    std::vector<Point3> points;

    bool empty() const noexcept { return points.empty(); }
    std::size_t size() const noexcept { return points.size(); }

    bool operator==(const PointCloud& other) const { return points == other.points; }
};

struct Bounds {
    Point3 lo;
    Point3 hi;
};

/// Throws EmptyCloud when there is nothing to match and InvalidArgument on NaN/inf.
inline void require_matchable(const PointCloud& cloud) {
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!is_finite(cloud.points[i])) {
            throw Error(ErrorCode::InvalidArgument, "non-finite point at index " + std::to_string(i));
        }
    }
}

inline Bounds bounds_of(const PointCloud& cloud) {
    require_matchable(cloud);
    Bounds b{cloud.points.front(), cloud.points.front()};
    for (const auto& p : cloud.points) {
        b.lo = b.lo.cwiseMin(p);
        b.hi = b.hi.cwiseMax(p);
    }
    return b;
}

/// Minimum triangle area (mm^2) for a landmark triple to pin down a rotation.
inline constexpr double kMinLandmarkArea = 1e-6;

/// Three named anatomical points. Probe and template landmarks correspond by
/// role, so `left` always pairs with `left`; no search is ever performed.
struct LandmarkTriple {
    static constexpr std::array<std::string_view, 3> kRoles{"left", "right", "apex"};

    Point3 left = Point3::Zero();
    Point3 right = Point3::Zero();
    Point3 apex = Point3::Zero();

    const Point3& operator[](std::size_t i) const { return i == 0 ? left : (i == 1 ? right : apex); }
    Point3& operator[](std::size_t i) { return i == 0 ? left : (i == 1 ? right : apex); }

    double area() const { return 0.5 * (right - left).cross(apex - left).norm(); }

    bool operator==(const LandmarkTriple& other) const {
        return left == other.left && right == other.right && apex == other.apex;
    }
};

/// Throws DegenerateLandmarks when the triple is non-finite, has coincident
/// points, or is collinear within kMinLandmarkArea.
inline void require_valid(const LandmarkTriple& t, std::string_view which = "landmarks") {
    for (std::size_t i = 0; i < 3; ++i) {
        if (!is_finite(t[i])) {
            throw Error(ErrorCode::DegenerateLandmarks,
                        std::string(which) + ": non-finite " + std::string(LandmarkTriple::kRoles[i]));
        }
    }
    if (t.left == t.right || t.left == t.apex || t.right == t.apex) {
        throw Error(ErrorCode::DegenerateLandmarks, std::string(which) + ": duplicate points");
    }
    if (!(t.area() > kMinLandmarkArea)) {
        throw Error(ErrorCode::DegenerateLandmarks, std::string(which) + ": collinear points");
    }
}

/// Proper rigid motion p -> rotation * p + translation.
struct RigidTransform {
    Matrix3 rotation = Matrix3::Identity();
    Point3 translation = Point3::Zero();

    static RigidTransform identity() { return {}; }

    static RigidTransform translate(const Point3& t) { return {Matrix3::Identity(), t}; }

    Point3 operator()(const Point3& p) const { return rotation * p + translation; }

    /// Orthonormal with det +1 within `tol`.
    bool is_proper(double tol = 1e-9) const {
        const double ortho = (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff();
        return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
    }
};

/// outer(inner(p)).
inline RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
    return {outer.rotation * inner.rotation, outer.rotation * inner.translation + outer.translation};
}

inline RigidTransform invert(const RigidTransform& t) {
    const Matrix3 rt = t.rotation.transpose();
    return {rt, -(rt * t.translation)};
}

inline PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(t(p));
    return out;
}

inline LandmarkTriple apply_transform(const RigidTransform& t, const LandmarkTriple& lm) {
    return {t(lm.left), t(lm.right), t(lm.apex)};
}

/// Rotation angle (radians) of a^T b, computed from the chordal distance so
/// it stays accurate for tiny angles where acos of the trace does not.
inline double rotation_angle_between(const Matrix3& a, const Matrix3& b) {
    const double chord = (a - b).norm();  // Frobenius = 2*sqrt(2)*sin(theta/2)
    const double s = std::min(1.0, chord / (2.0 * std::sqrt(2.0)));
    return 2.0 * std::asin(s);
}

struct Registration {
    RigidTransform transform;
    /// RMS distance (mm) between transformed source landmarks and targets.
    double residual_rms = 0.0;
};

/// Least-squares rigid map taking `src` landmarks onto `dst` landmarks, role by
/// role. Closed-form orthogonal Procrustes (Kabsch) with the reflection
/// excluded; no scale is estimated.
inline Registration rigid_from_landmarks(const LandmarkTriple& src, const LandmarkTriple& dst) {
    require_valid(src, "source landmarks");
    require_valid(dst, "target landmarks");

    const Point3 src_mean = (src.left + src.right + src.apex) / 3.0;
    const Point3 dst_mean = (dst.left + dst.right + dst.apex) / 3.0;

    Matrix3 cross_cov = Matrix3::Zero();
    for (std::size_t i = 0; i < 3; ++i) {
        cross_cov += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();
    }

    // Three centered points span a plane, so cross_cov has rank 2; the sign
    // of the null-space column is fixed by the determinant correction.
    const Eigen::JacobiSVD<Matrix3> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix3& u = svd.matrixU();
    const Matrix3& v = svd.matrixV();
    Matrix3 fix = Matrix3::Identity();
    fix(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

    Registration reg;
    reg.transform.rotation = v * fix * u.transpose();
    reg.transform.translation = dst_mean - reg.transform.rotation * src_mean;

    double sq = 0.0;
    for (std::size_t i = 0; i < 3; ++i) sq += (reg.transform(src[i]) - dst[i]).squaredNorm();
    reg.residual_rms = std::sqrt(sq / 3.0);
    return reg;
}

}  // namespace skullid

#endif  // SKULLID_GEOMETRY_HPP
