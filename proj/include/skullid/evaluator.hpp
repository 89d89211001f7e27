// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_EVALUATOR_HPP
#define SKULLID_EVALUATOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "skullid/error.hpp"
#include "skullid/gallery.hpp"
#include "skullid/io.hpp"
#include "skullid/matcher.hpp"

namespace skullid {

/// One verification attempt. Probes are shared because cross-claim
/// evaluation pairs every probe with every enrolled subject.
struct Trial {
    std::shared_ptr<const ProbeScan> probe;  // probe->label carries the ground truth
    std::string claimed_id;

    bool genuine() const { return probe && probe->label && *probe->label == claimed_id; }
};

struct ScoredTrial {
    std::size_t trial_index = 0;
    std::string claimed_id;
    bool genuine = false;
    MatchScore score;
};

/// Verifies every trial against its claimed template, in input order.
inline std::vector<ScoredTrial> run_trials(const Gallery& g, std::span<const Trial> trials) {
    std::vector<ScoredTrial> out;
    out.reserve(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const Trial& t = trials[i];
        if (!t.probe) throw Error(ErrorCode::InvalidArgument, "trial " + std::to_string(i) + ": no probe");
        if (!g.contains(t.claimed_id)) {
            throw Error(ErrorCode::UnknownSubject, "trial " + std::to_string(i) + ": '" + t.claimed_id + "'");
        }
        out.push_back({i, t.claimed_id, t.genuine(), g.verify(t.claimed_id, *t.probe).score});
    }
    return out;
}

struct SweepRow {
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
    std::size_t genuine_accepts = 0;
    std::size_t impostor_accepts = 0;
};

inline constexpr std::size_t kHistogramBins = 20;
using ScoreHistogram = std::array<std::size_t, kHistogramBins>;

struct EvalReport {
    std::vector<SweepRow> rows;  // ascending threshold
    std::size_t genuine_count = 0;
    std::size_t impostor_count = 0;
    double eer = 0.0;
    double eer_threshold = 0.0;
    std::optional<double> rank1_accuracy;
    ScoreHistogram genuine_histogram{};
    ScoreHistogram impostor_histogram{};
};

/// Inclusive a, a+step, ..., up to b (with a small slack for rounding).
inline std::vector<double> threshold_range(double first, double last, double step) {
    if (!(step > 0.0) || !std::isfinite(first) || !std::isfinite(last) || last < first) {
        throw Error(ErrorCode::InvalidArgument, "threshold range needs first <= last and step > 0");
    }
    const auto n = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
    if (n > 1'000'000) throw Error(ErrorCode::InvalidArgument, "threshold range too dense");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = first + static_cast<double>(i) * step;
    return out;
}

/// FAR/FRR at each threshold (accept iff dice >= threshold) and the EER
/// interpolated linearly between the two thresholds bracketing the crossing.
inline EvalReport sweep(std::span<const ScoredTrial> scored, std::span<const double> thresholds) {
    EvalReport rep;
    for (const auto& s : scored) {
        auto& hist = s.genuine ? rep.genuine_histogram : rep.impostor_histogram;
        const double d = std::clamp(s.score.dice, 0.0, 1.0);
        hist[std::min(kHistogramBins - 1, static_cast<std::size_t>(d * kHistogramBins))] += 1;
        (s.genuine ? rep.genuine_count : rep.impostor_count) += 1;
    }
    if (rep.genuine_count == 0) throw Error(ErrorCode::NoGenuineTrials);
    if (rep.impostor_count == 0) throw Error(ErrorCode::NoImpostorTrials);
    if (thresholds.empty()) throw Error(ErrorCode::InvalidArgument, "no thresholds to sweep");

    std::vector<double> sorted(thresholds.begin(), thresholds.end());
    for (const double t : sorted) {
        if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "non-finite threshold");
    }
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    rep.rows.reserve(sorted.size());
    for (const double t : sorted) {
        SweepRow row;
        row.threshold = t;
        for (const auto& s : scored) {
            if (s.score.dice >= t) (s.genuine ? row.genuine_accepts : row.impostor_accepts) += 1;
        }
        row.far = static_cast<double>(row.impostor_accepts) / static_cast<double>(rep.impostor_count);
        row.frr = static_cast<double>(rep.genuine_count - row.genuine_accepts) / static_cast<double>(rep.genuine_count);
        rep.rows.push_back(row);
    }

    // FRR - FAR is non-decreasing in the threshold; find where it turns >= 0.
    const auto& rows = rep.rows;
    std::size_t cross = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].frr - rows[i].far >= 0.0) {
            cross = i;
            break;
        }
    }
    if (cross == rows.size()) {
        rep.eer = 0.5 * (rows.back().far + rows.back().frr);
        rep.eer_threshold = rows.back().threshold;
    } else if (cross == 0 || rows[cross].frr == rows[cross].far) {
        rep.eer = 0.5 * (rows[cross].far + rows[cross].frr);
        rep.eer_threshold = rows[cross].threshold;
    } else {
        const SweepRow& lo = rows[cross - 1];
        const SweepRow& hi = rows[cross];
        const double d_lo = lo.frr - lo.far;
        const double d_hi = hi.frr - hi.far;
        const double t = -d_lo / (d_hi - d_lo);
        rep.eer_threshold = lo.threshold + t * (hi.threshold - lo.threshold);
        rep.eer = lo.far + t * (hi.far - lo.far);
    }
    return rep;
}

/// Fraction of labelled probes whose top-ranked subject is the true one. With
/// `min_dice`, the top score must also reach that operating threshold.
inline double rank1(const Gallery& g, std::span<const ProbeScan> probes, std::optional<double> min_dice = {}) {
    if (g.empty()) throw Error(ErrorCode::EmptyGallery);
    if (probes.empty()) throw Error(ErrorCode::InvalidArgument, "no probes");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (!probes[i].label) throw Error(ErrorCode::InvalidArgument, "probe " + std::to_string(i) + " has no label");
        const IdentifyResult r = g.identify(probes[i]);
        const auto& top = r.ranked.front();
        if (top.subject_id == *probes[i].label && (!min_dice || top.score.dice >= *min_dice)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(probes.size());
}

inline void write_csv(std::ostream& out, const EvalReport& rep) {
    out << "threshold,far,frr,genuine_accepts,impostor_accepts\n";
    for (const auto& r : rep.rows) {
        out << io::format_double(r.threshold) << ',' << io::format_double(r.far) << ',' << io::format_double(r.frr)
            << ',' << r.genuine_accepts << ',' << r.impostor_accepts << '\n';
    }
}

inline void write_summary(std::ostream& out, const EvalReport& rep) {
    const auto flags = out.flags();
    out << std::fixed << std::setprecision(6);
    out << "genuine_trials=" << rep.genuine_count << " impostor_trials=" << rep.impostor_count << '\n';
    out << "eer=" << rep.eer << " eer_threshold=" << rep.eer_threshold << '\n';
    if (rep.rank1_accuracy) out << "rank1=" << *rep.rank1_accuracy << '\n';
    auto hist = [&](const char* name, const ScoreHistogram& h) {
        out << name;
        for (const auto c : h) out << ' ' << c;
        out << '\n';
    };
    hist("genuine_histogram", rep.genuine_histogram);
    hist("impostor_histogram", rep.impostor_histogram);
    out.flags(flags);
}

}  // namespace skullid

#endif  // SKULLID_EVALUATOR_HPP
