// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_VOXEL_HPP
#define SKULLID_VOXEL_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "skullid/error.hpp"
#include "skullid/geometry.hpp"
#include "skullid/io.hpp"

namespace skullid {

using VoxelIndex = std::array<std::int64_t, 3>;

/// Largest grid accepted, in voxels (a 512 MiB bitset).
inline constexpr std::uint64_t kMaxVoxels = std::uint64_t{1} << 32;

struct GridSpec {
    double voxel_size = 1.0;           // mm
    Point3 origin = Point3::Zero();    // corner of voxel (0,0,0)
    VoxelIndex dims{1, 1, 1};

    std::uint64_t voxel_count() const {
        return static_cast<std::uint64_t>(dims[0]) * static_cast<std::uint64_t>(dims[1]) *
               static_cast<std::uint64_t>(dims[2]);
    }

    bool operator==(const GridSpec& o) const {
        return voxel_size == o.voxel_size && origin == o.origin && dims == o.dims;
    }
};

inline void require_valid(const GridSpec& spec) {
    if (!(spec.voxel_size > 0.0) || !std::isfinite(spec.voxel_size)) {
        throw Error(ErrorCode::InvalidArgument, "voxel_size must be positive and finite");
    }
    if (!is_finite(spec.origin)) throw Error(ErrorCode::InvalidArgument, "grid origin must be finite");
    std::uint64_t total = 1;
    for (const auto d : spec.dims) {
        if (d < 1) throw Error(ErrorCode::InvalidArgument, "grid dims must be >= 1");
        if (static_cast<std::uint64_t>(d) > kMaxVoxels / total) {
            throw Error(ErrorCode::InvalidArgument, "grid too large");
        }
        total *= static_cast<std::uint64_t>(d);
    }
}

/// Lattice cell containing `p`: floor((p - origin) / voxel_size), without any
/// range check against dims.
inline std::optional<VoxelIndex> lattice_index(const GridSpec& spec, const Point3& p) {
    VoxelIndex idx{};
    for (int a = 0; a < 3; ++a) {
        const double f = std::floor((p[a] - spec.origin[a]) / spec.voxel_size);
        if (!(f >= -9.0e15 && f <= 9.0e15)) return std::nullopt;
        idx[a] = static_cast<std::int64_t>(f);
    }
    return idx;
}

inline bool in_grid(const GridSpec& spec, const VoxelIndex& idx) {
    for (int a = 0; a < 3; ++a) {
        if (idx[a] < 0 || idx[a] >= spec.dims[a]) return false;
    }
    return true;
}

inline Point3 voxel_center(const GridSpec& spec, const VoxelIndex& idx) {
    return spec.origin + spec.voxel_size * Point3(static_cast<double>(idx[0]) + 0.5, static_cast<double>(idx[1]) + 0.5,
                                                  static_cast<double>(idx[2]) + 0.5);
}

/// Tight bounding box of `cloud` padded by `padding` voxels on every side.
inline GridSpec grid_around(const PointCloud& cloud, double voxel_size, int padding) {
    if (padding < 0) throw Error(ErrorCode::InvalidArgument, "padding must be >= 0");
    const Bounds b = bounds_of(cloud);
    GridSpec spec;
    spec.voxel_size = voxel_size;
    // Half a voxel of extra margin keeps the extreme points off cell faces.
    spec.origin = b.lo - Point3::Constant(voxel_size * (padding + 0.5));
    require_valid(GridSpec{voxel_size, spec.origin, {1, 1, 1}});
    for (int a = 0; a < 3; ++a) {
        // Rounding in (lo - origin) can land the minimum a hair below cell 0.
        while (std::floor((b.lo[a] - spec.origin[a]) / voxel_size) < 0.0) spec.origin[a] -= voxel_size;
        const double top = std::floor((b.hi[a] - spec.origin[a]) / voxel_size);
        if (!(top < 1.0e9)) throw Error(ErrorCode::InvalidArgument, "cloud extent too large for voxel size");
        spec.dims[a] = static_cast<std::int64_t>(top) + 1 + padding;
    }
    require_valid(spec);
    return spec;
}

/// Binary occupancy on a GridSpec; linear index is x-fastest.
class VoxelGrid {
public:
    explicit VoxelGrid(const GridSpec& spec) : spec_(spec) {
        require_valid(spec_);
        words_.assign(static_cast<std::size_t>((spec_.voxel_count() + 63) / 64), 0);
    }

    const GridSpec& spec() const noexcept { return spec_; }
    std::uint64_t size() const noexcept { return spec_.voxel_count(); }
    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    std::uint64_t linear(const VoxelIndex& idx) const {
        return static_cast<std::uint64_t>(idx[0]) +
               static_cast<std::uint64_t>(spec_.dims[0]) *
                   (static_cast<std::uint64_t>(idx[1]) +
                    static_cast<std::uint64_t>(spec_.dims[1]) * static_cast<std::uint64_t>(idx[2]));
    }

    VoxelIndex unlinear(std::uint64_t i) const {
        const auto nx = static_cast<std::uint64_t>(spec_.dims[0]);
        const auto ny = static_cast<std::uint64_t>(spec_.dims[1]);
        return {static_cast<std::int64_t>(i % nx), static_cast<std::int64_t>((i / nx) % ny),
                static_cast<std::int64_t>(i / (nx * ny))};
    }

    bool test(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::uint64_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

    bool test(const VoxelIndex& idx) const { return test(linear(idx)); }
    void set(const VoxelIndex& idx) { set(linear(idx)); }

    bool operator==(const VoxelGrid& o) const { return spec_ == o.spec_ && words_ == o.words_; }

private:
    GridSpec spec_;
    std::vector<std::uint64_t> words_;
};

struct Voxelized {
    VoxelGrid grid;
    /// Points that fell outside [0, dims); they are dropped, never wrapped.
    std::size_t clipped = 0;
};

inline Voxelized voxelize(const PointCloud& cloud, const GridSpec& spec) {
    require_matchable(cloud);
    Voxelized out{VoxelGrid(spec), 0};
    for (const auto& p : cloud.points) {
        const auto idx = lattice_index(spec, p);
        if (!idx || !in_grid(spec, *idx)) {
            ++out.clipped;
            continue;
        }
        out.grid.set(*idx);
    }
    if (out.clipped == cloud.size()) {
        throw Error(ErrorCode::AllPointsClipped, std::to_string(cloud.size()) + " points outside the grid");
    }
    return out;
}

inline std::uint64_t occupied_count(const VoxelGrid& grid) {
    std::uint64_t n = 0;
    for (const auto w : grid.words()) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
}

/// |A ∩ B|. Grids must share an identical GridSpec.
inline std::uint64_t overlap(const VoxelGrid& a, const VoxelGrid& b) {
    if (!(a.spec() == b.spec())) throw Error(ErrorCode::GridSpecMismatch);
    const auto& wa = a.words();
    const auto& wb = b.words();
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < wa.size(); ++i) n += static_cast<std::uint64_t>(std::popcount(wa[i] & wb[i]));
    return n;
}

struct MatchScore {
    /// Matched-pixel count: each shared voxel is counted once per shape.
    std::uint64_t matched_count = 0;
    std::uint64_t intersection = 0;
    std::uint64_t count_a = 0;
    std::uint64_t count_b = 0;
    double dice = 0.0;
    double jaccard = 0.0;
    /// Probe points dropped outside the template grid (filled by the matcher).
    std::size_t probe_clipped = 0;

    bool operator==(const MatchScore&) const = default;
};

inline MatchScore similarity(const VoxelGrid& a, const VoxelGrid& b) {
    MatchScore s;
    s.intersection = overlap(a, b);
    s.count_a = occupied_count(a);
    s.count_b = occupied_count(b);
    const std::uint64_t total = s.count_a + s.count_b;
    if (total == 0) throw Error(ErrorCode::DegenerateScore, "both grids are empty");
    s.matched_count = 2 * s.intersection;
    s.dice = static_cast<double>(s.matched_count) / static_cast<double>(total);
    s.jaccard = static_cast<double>(s.intersection) / static_cast<double>(total - s.intersection);
    return s;
}

// ---------------------------------------------------------------------------
// Debug dump: `voxelgrid nx ny nz voxel_size ox oy oz`, then `runs K` and K
// run lengths alternating empty/occupied, starting with an empty run.

inline void write_grid(std::ostream& out, const VoxelGrid& grid) {
    const auto& s = grid.spec();
    out << "voxelgrid " << s.dims[0] << ' ' << s.dims[1] << ' ' << s.dims[2] << ' ' << io::format_double(s.voxel_size)
        << ' ' << io::format_double(s.origin.x()) << ' ' << io::format_double(s.origin.y()) << ' '
        << io::format_double(s.origin.z()) << '\n';

    std::vector<std::uint64_t> runs;
    bool current = false;
    std::uint64_t len = 0;
    for (std::uint64_t i = 0; i < grid.size(); ++i) {
        const bool bit = grid.test(i);
        if (bit != current) {
            runs.push_back(len);
            current = bit;
            len = 0;
        }
        ++len;
    }
    runs.push_back(len);

    out << "runs " << runs.size() << '\n';
    for (std::size_t i = 0; i < runs.size(); ++i) {
        out << runs[i] << ((i % 16 == 15 || i + 1 == runs.size()) ? '\n' : ' ');
    }
}

inline VoxelGrid read_grid(std::istream& in, std::string_view source = "<grid>") {
    std::string raw;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line_no) + ": " + why);
    };

    if (!std::getline(in, raw)) fail("empty grid file");
    ++line_no;
    const auto head = io::detail::split(io::detail::trim(raw), ' ');
    if (head.size() != 8 || head[0] != "voxelgrid") fail("expected 'voxelgrid nx ny nz voxel_size ox oy oz'");
    GridSpec spec;
    for (int a = 0; a < 3; ++a) spec.dims[a] = io::detail::parse_int(head[1 + a], source, line_no);
    spec.voxel_size = io::detail::parse_double(head[4], source, line_no);
    spec.origin = Point3(io::detail::parse_double(head[5], source, line_no),
                         io::detail::parse_double(head[6], source, line_no),
                         io::detail::parse_double(head[7], source, line_no));
    try {
        require_valid(spec);
    } catch (const Error& e) {
        fail(e.detail());
    }

    if (!std::getline(in, raw)) fail("missing runs line");
    ++line_no;
    const auto rl = io::detail::split(io::detail::trim(raw), ' ');
    if (rl.size() != 2 || rl[0] != "runs") fail("expected 'runs K'");
    const auto run_count = io::detail::parse_int(rl[1], source, line_no);
    if (run_count < 1) fail("run count must be >= 1");

    VoxelGrid grid(spec);
    const std::uint64_t total = spec.voxel_count();
    std::uint64_t pos = 0;
    long long seen = 0;
    bool occupied = false;
    while (seen < run_count && std::getline(in, raw)) {
        ++line_no;
        for (const auto tok : io::detail::split(io::detail::trim(raw), ' ')) {
            if (seen == run_count) fail("more runs than declared");
            const auto len = io::detail::parse_int(tok, source, line_no);
            if (len < 0) fail("negative run length");
            if (static_cast<std::uint64_t>(len) > total - pos) fail("runs exceed grid size");
            if (occupied) {
                for (std::uint64_t i = pos; i < pos + static_cast<std::uint64_t>(len); ++i) grid.set(i);
            }
            pos += static_cast<std::uint64_t>(len);
            occupied = !occupied;
            ++seen;
        }
    }
    if (seen != run_count) fail("expected " + std::to_string(run_count) + " runs, found " + std::to_string(seen));
    if (pos != total) fail("runs cover " + std::to_string(pos) + " voxels, grid has " + std::to_string(total));
    while (std::getline(in, raw)) {
        ++line_no;
        if (!io::detail::trim(raw).empty()) fail("trailing data after runs");
    }
    return grid;
}

}  // namespace skullid

#endif  // SKULLID_VOXEL_HPP
