// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_SYNTH_HPP
#define SKULLID_SYNTH_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "skullid/error.hpp"
#include "skullid/geometry.hpp"
#include "skullid/matcher.hpp"

namespace skullid::synth {

// Portable generators. SplitMix64 (Steele, Lea & Flood) expands seeds;
// xoshiro256** (Blackman & Vigna) produces the stream. Both are fixed by
// their published constants, so streams are identical on every platform:
//   splitmix64, state 0:        0xe220a8397b1dcdaf, 0x6e789e6aa1b965f4, ...
//   xoshiro256** from seed 42:  1546998764402558742, 6990951692964543102, ...

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    /// Independent stream `stream` of `seed`.
    Rng(std::uint64_t seed, std::uint64_t stream) noexcept : Rng(mix(seed, stream)) {}

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal by Box-Muller; the sine branch is cached.
    double gaussian() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Point3 gaussian3() noexcept {
        const double x = gaussian();
        const double y = gaussian();
        const double z = gaussian();
        return {x, y, z};
    }

    Point3 unit_vector() noexcept {
        for (;;) {
            const Point3 g = gaussian3();
            const double n = g.norm();
            if (n > 1e-12) return g / n;
        }
    }

    /// Uniformly distributed proper rotation (normalized Gaussian quaternion).
    Matrix3 rotation() noexcept {
        for (;;) {
            const double w = gaussian();
            const double x = gaussian();
            const double y = gaussian();
            const double z = gaussian();
            const double n = std::sqrt(w * w + x * x + y * y + z * z);
            if (n < 1e-12) continue;
            return Eigen::Quaterniond(w / n, x / n, y / n, z / n).toRotationMatrix();
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) noexcept {
        std::uint64_t a = seed;
        std::uint64_t b = stream ^ 0xD1B54A32D192ED03ull;
        return splitmix64_next(a) ^ (splitmix64_next(b) << 1);
    }

    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---------------------------------------------------------------------------

struct SubjectParams {
    std::uint64_t seed = 1;
    Point3 semi_axes{95.0, 120.0, 80.0};  // mm
    int bump_count = 12;
    double bump_amplitude = 3.0;  // mm
    int sample_count = 20000;
};

struct PerturbSpec {
    double noise_sigma = 0.0;  // mm, per axis
    std::uint64_t pose_seed = 0;
    double landmark_jitter_sigma = 0.0;  // mm, per axis
};

inline void require_valid(const SubjectParams& p) {
    if (!(p.semi_axes.minCoeff() > 0.0) || !is_finite(p.semi_axes)) {
        throw Error(ErrorCode::InvalidArgument, "semi-axes must be positive");
    }
    if (p.bump_count < 0) throw Error(ErrorCode::InvalidArgument, "bump_count must be >= 0");
    if (!std::isfinite(p.bump_amplitude)) throw Error(ErrorCode::InvalidArgument, "bump_amplitude must be finite");
    if (p.sample_count < 100) throw Error(ErrorCode::InvalidArgument, "sample_count must be >= 100");
}

inline void require_valid(const PerturbSpec& s) {
    if (!(s.noise_sigma >= 0.0) || !(s.landmark_jitter_sigma >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sigmas must be >= 0");
    }
}

/// Ellipsoid with smooth seeded radial bumps. Each bump is a von Mises-like
/// cap exp((u.d - 1) / w^2) around direction d with angular width w.
class BumpySurface {
public:
    explicit BumpySurface(const SubjectParams& p) : axes_(p.semi_axes) {
        Rng rng(p.seed, 1);
        bumps_.reserve(static_cast<std::size_t>(p.bump_count));
        for (int k = 0; k < p.bump_count; ++k) {
            Bump b;
            b.direction = rng.unit_vector();
            const double width = rng.uniform(15.0, 30.0) * std::numbers::pi / 180.0;
            b.inv_width_sq = 1.0 / (width * width);
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            b.amplitude = sign * p.bump_amplitude * rng.uniform(0.5, 1.0);
            bumps_.push_back(b);
        }
    }

    /// Surface point along unit direction `u`.
    Point3 at(const Point3& u) const {
        const Point3 base = axes_.cwiseProduct(u);
        double h = 0.0;
        for (const auto& b : bumps_) h += b.amplitude * std::exp((u.dot(b.direction) - 1.0) * b.inv_width_sq);
        if (h == 0.0) return base;
        return base + h * base.normalized();
    }

private:
    struct Bump {
        Point3 direction;
        double inv_width_sq = 0.0;
        double amplitude = 0.0;
    };

    Point3 axes_;
    std::vector<Bump> bumps_;
};

/// Canonical-pose scan of one synthetic subject. Landmarks are the surface
/// points along -x (left), +x (right) and +z (apex).
inline ProbeScan generate_subject(const SubjectParams& params) {
    require_valid(params);
    const BumpySurface surface(params);
    Rng rng(params.seed, 2);

    ProbeScan scan;
    scan.cloud.points.reserve(static_cast<std::size_t>(params.sample_count));
    for (int i = 0; i < params.sample_count; ++i) scan.cloud.points.push_back(surface.at(rng.unit_vector()));
    scan.landmarks.left = surface.at(Point3(-1.0, 0.0, 0.0));
    scan.landmarks.right = surface.at(Point3(1.0, 0.0, 0.0));
    scan.landmarks.apex = surface.at(Point3(0.0, 0.0, 1.0));
    return scan;
}

struct Perturbed {
    ProbeScan scan;
    /// Scan frame to perturbed frame (noise aside).
    RigidTransform pose;
    /// Landmark jitter draws rejected as degenerate before one was accepted.
    int landmark_retries = 0;
};

inline constexpr int kMaxJitterRetries = 64;

/// Gaussian noise per point, then a seeded random pose on cloud and
/// landmarks jointly, then independent landmark jitter.
inline Perturbed perturb(const ProbeScan& scan, const PerturbSpec& spec) {
    require_valid(spec);
    Perturbed out;

    Rng pose_rng(spec.pose_seed, 12);
    out.pose.rotation = pose_rng.rotation();
    out.pose.translation = Point3(pose_rng.uniform(-50.0, 50.0), pose_rng.uniform(-50.0, 50.0),
                                  pose_rng.uniform(-50.0, 50.0));

    Rng noise_rng(spec.pose_seed, 11);
    out.scan.label = scan.label;
    out.scan.cloud.points.reserve(scan.cloud.size());
    for (const auto& p : scan.cloud.points) {
        const Point3 q = spec.noise_sigma > 0.0 ? Point3(p + spec.noise_sigma * noise_rng.gaussian3()) : p;
        out.scan.cloud.points.push_back(out.pose(q));
    }

    const LandmarkTriple moved = apply_transform(out.pose, scan.landmarks);
    if (spec.landmark_jitter_sigma == 0.0) {
        out.scan.landmarks = moved;
        return out;
    }
    for (int attempt = 0; attempt <= kMaxJitterRetries; ++attempt) {
        Rng jitter_rng(spec.pose_seed, 13 + static_cast<std::uint64_t>(attempt));
        LandmarkTriple lm = moved;
        for (std::size_t r = 0; r < 3; ++r) lm[r] += spec.landmark_jitter_sigma * jitter_rng.gaussian3();
        try {
            require_valid(lm);
        } catch (const Error&) {
            ++out.landmark_retries;
            continue;
        }
        out.scan.landmarks = lm;
        return out;
    }
    throw Error(ErrorCode::DegenerateLandmarks, "landmark jitter kept producing degenerate triples");
}

}  // namespace skullid::synth

#endif  // SKULLID_SYNTH_HPP
