// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_DEMO_HPP
#define SKULLID_DEMO_HPP

#include <cstdio>
#include <string>

#include "skullid/geometry.hpp"
#include "skullid/voxel.hpp"

namespace skullid::demo {

inline constexpr int kSquareSide = 100;
inline constexpr int kHalfShift = kSquareSide / 2;

/// Solid side x side square of unit-spaced points in the z = 0 plane,
/// lower corner at (dx, 0, 0).
inline PointCloud square(int side, double dx = 0.0) {
    PointCloud c;
    c.points.reserve(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) c.points.emplace_back(dx + i, j, 0.0);
    }
    return c;
}

/// 1 mm grid holding the square and its half-shifted copy with 2 voxels of padding.
inline GridSpec square_grid() {
    return GridSpec{1.0, Point3(-2.0, -2.0, -2.0), {kSquareSide + kHalfShift + 4, kSquareSide + 4, 5}};
}

struct SquareDemo {
    MatchScore coincident;
    MatchScore half_shift;
};

inline SquareDemo run_squares() {
    const GridSpec spec = square_grid();
    const VoxelGrid base = voxelize(square(kSquareSide), spec).grid;
    const VoxelGrid same = voxelize(square(kSquareSide), spec).grid;
    const VoxelGrid shifted = voxelize(square(kSquareSide, kHalfShift), spec).grid;
    return {similarity(base, same), similarity(base, shifted)};
}

/// Literal rule: the shapes are the same only when every pixel of both matched.
inline bool all_pixels_matched(const MatchScore& s) { return s.matched_count == s.count_a + s.count_b; }

inline std::string format_line(const char* name, const MatchScore& s) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: matched=%llu dice=%.3f %s", name,
                  static_cast<unsigned long long>(s.matched_count), s.dice,
                  all_pixels_matched(s) ? "SAME" : "DIFFERENT");
    return buf;
}

}  // namespace skullid::demo

#endif  // SKULLID_DEMO_HPP
