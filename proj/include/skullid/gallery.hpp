// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_GALLERY_HPP
#define SKULLID_GALLERY_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skullid/error.hpp"
#include "skullid/io.hpp"
#include "skullid/matcher.hpp"
#include "skullid/voxel.hpp"

namespace skullid {

inline constexpr int kGalleryVersion = 1;
inline constexpr const char* kManifestName = "gallery.manifest";

struct RankedScore {
    std::string subject_id;
    MatchScore score;
    double landmark_residual_rms = 0.0;
    bool accepted = false;
};

struct IdentifyResult {
    /// Dice descending, ties by ascending subject_id.
    std::vector<RankedScore> ranked;
    std::optional<std::string> best_accepted;
};

/// Subject ids double as directory names, so they are restricted to a
/// portable filename alphabet.
inline bool is_valid_subject_id(const std::string& id) {
    if (id.empty() || id.size() > 128 || id.front() == '.') return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
               c == '.';
    });
}

inline std::int64_t unix_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

/// Enrolled templates sharing one MatchConfig. Reads (identify, verify,
/// save) are const and may run concurrently; enroll needs exclusive access.
class Gallery {
public:
    Gallery() = default;
    explicit Gallery(const MatchConfig& config) : config_(config) { require_valid(config_); }

    const MatchConfig& config() const noexcept { return config_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::map<std::string, TemplateRecord>& records() const noexcept { return records_; }

    bool contains(const std::string& id) const { return records_.count(id) != 0; }

    const TemplateRecord& at(const std::string& id) const {
        const auto it = records_.find(id);
        if (it == records_.end()) throw Error(ErrorCode::UnknownSubject, id);
        return it->second;
    }

    /// Decision parameters do not affect cached grids, so they may change
    /// without re-enrollment. Voxel size and padding may not.
    void set_decision(double threshold, double max_landmark_residual) {
        MatchConfig next = config_;
        next.decision_threshold = threshold;
        next.max_landmark_residual = max_landmark_residual;
        require_valid(next);
        config_ = next;
    }

    const TemplateRecord& enroll(const std::string& subject_id, const ProbeScan& scan,
                                 std::int64_t enrolled_at = unix_now()) {
        if (!is_valid_subject_id(subject_id)) {
            throw Error(ErrorCode::InvalidArgument, "subject id '" + subject_id + "' must match [A-Za-z0-9._-]+");
        }
        if (contains(subject_id)) throw Error(ErrorCode::DuplicateSubject, subject_id);
        auto rec = make_template(subject_id, scan, config_, enrolled_at);
        return records_.emplace(subject_id, std::move(rec)).first->second;
    }

    Decision verify(const std::string& subject_id, const ProbeScan& probe) const {
        return match_probe(probe, at(subject_id), config_);
    }

    IdentifyResult identify(const ProbeScan& probe) const {
        if (records_.empty()) throw Error(ErrorCode::EmptyGallery);
        IdentifyResult result;
        result.ranked.reserve(records_.size());
        for (const auto& [id, rec] : records_) {
            const Decision d = match_probe(probe, rec, config_);
            result.ranked.push_back({id, d.score, d.landmark_residual_rms, d.accepted});
        }
        // records_ iterates in ascending id order, so a stable sort keeps the tie-break.
        std::stable_sort(result.ranked.begin(), result.ranked.end(),
                         [](const RankedScore& a, const RankedScore& b) { return a.score.dice > b.score.dice; });
        if (result.ranked.front().accepted) result.best_accepted = result.ranked.front().subject_id;
        return result;
    }

    void save(const std::filesystem::path& dir) const;
    static Gallery load(const std::filesystem::path& dir);

    bool operator==(const Gallery& o) const { return config_ == o.config_ && records_ == o.records_; }

private:
    MatchConfig config_;
    std::map<std::string, TemplateRecord> records_;
};

namespace detail {

inline std::filesystem::path normalized_dir(const std::filesystem::path& dir) {
    auto p = dir.lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    if (p.empty()) throw Error(ErrorCode::InvalidArgument, "empty gallery path");
    return p;
}

inline std::filesystem::path sibling_scratch(const std::filesystem::path& dir, const char* tag) {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    return dir.parent_path() / (dir.filename().string() + "." + tag + "-" + std::to_string(stamp) + "-" +
                                std::to_string(counter.fetch_add(1)));
}

[[noreturn]] inline void corrupt(const std::filesystem::path& file, const std::string& why) {
    throw Error(ErrorCode::CorruptGallery, file.string() + ": " + why);
}

}  // namespace detail

/// Writes the whole gallery into a scratch sibling directory and swaps it in
/// by rename, so readers never see a half-written tree.
inline void Gallery::save(const std::filesystem::path& dir_in) const {
    namespace fs = std::filesystem;
    const fs::path dir = detail::normalized_dir(dir_in);
    const fs::path tmp = detail::sibling_scratch(dir, "tmp");

    std::error_code ec;
    try {
        fs::create_directories(tmp / "subjects");

        nlohmann::json manifest;
        manifest["version"] = kGalleryVersion;
        manifest["voxel_size_mm"] = config_.voxel_size;
        manifest["padding_voxels"] = config_.padding_voxels;
        manifest["decision_threshold"] = config_.decision_threshold;
        manifest["max_landmark_residual_mm"] = config_.max_landmark_residual;
        manifest["subjects"] = nlohmann::json::array();
        manifest["enrolled_at"] = nlohmann::json::object();
        for (const auto& [id, rec] : records_) {
            manifest["subjects"].push_back(id);
            manifest["enrolled_at"][id] = rec.enrolled_at;

            const fs::path sub = tmp / "subjects" / id;
            fs::create_directories(sub);
            io::write_cloud(sub / "scan.xyz", rec.cloud);
            io::write_landmarks(sub / "landmarks.lmk", rec.landmarks);
            auto out = io::detail::open_out(sub / "grid.rle");
            write_grid(out, rec.grid);
            if (!out) throw Error(ErrorCode::IoError, "failed writing " + (sub / "grid.rle").string());
        }
        {
            auto out = io::detail::open_out(tmp / kManifestName);
            out << manifest.dump(2) << '\n';
            if (!out) throw Error(ErrorCode::IoError, "failed writing manifest");
        }

        if (fs::exists(dir)) {
            const fs::path old = detail::sibling_scratch(dir, "old");
            fs::rename(dir, old);
            fs::rename(tmp, dir);
            fs::remove_all(old, ec);
        } else {
            if (!dir.parent_path().empty()) fs::create_directories(dir.parent_path());
            fs::rename(tmp, dir);
        }
    } catch (const fs::filesystem_error& e) {
        fs::remove_all(tmp, ec);
        throw Error(ErrorCode::IoError, e.what());
    } catch (...) {
        fs::remove_all(tmp, ec);
        throw;
    }
}

inline Gallery Gallery::load(const std::filesystem::path& dir_in) {
    namespace fs = std::filesystem;
    const fs::path dir = detail::normalized_dir(dir_in);
    const fs::path manifest_path = dir / kManifestName;
    if (!fs::exists(manifest_path)) detail::corrupt(manifest_path, "missing manifest");

    nlohmann::json manifest;
    try {
        std::ifstream in(manifest_path, std::ios::binary);
        if (!in) detail::corrupt(manifest_path, "unreadable");
        manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        detail::corrupt(manifest_path, e.what());
    }

    Gallery g;
    std::vector<std::string> subjects;
    try {
        if (!manifest.is_object()) detail::corrupt(manifest_path, "manifest is not an object");
        if (!manifest.contains("version") || !manifest["version"].is_number_integer()) {
            detail::corrupt(manifest_path, "missing integer 'version'");
        }
        const int version = manifest["version"].get<int>();
        if (version != kGalleryVersion) {
            throw Error(ErrorCode::VersionMismatch, manifest_path.string() + ": version " + std::to_string(version) +
                                                        ", expected " + std::to_string(kGalleryVersion));
        }
        MatchConfig cfg;
        cfg.voxel_size = manifest.at("voxel_size_mm").get<double>();
        cfg.padding_voxels = manifest.at("padding_voxels").get<int>();
        cfg.decision_threshold = manifest.at("decision_threshold").get<double>();
        cfg.max_landmark_residual = manifest.at("max_landmark_residual_mm").get<double>();
        require_valid(cfg);
        g.config_ = cfg;
        subjects = manifest.at("subjects").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        detail::corrupt(manifest_path, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptGallery) throw;
        detail::corrupt(manifest_path, e.what());
    }

    const nlohmann::json stamps = manifest.value("enrolled_at", nlohmann::json::object());
    for (const auto& id : subjects) {
        if (!is_valid_subject_id(id)) detail::corrupt(manifest_path, "invalid subject id '" + id + "'");
        if (g.contains(id)) detail::corrupt(manifest_path, "duplicate subject '" + id + "'");

        const fs::path sub = dir / "subjects" / id;
        TemplateRecord rec;
        rec.subject_id = id;
        fs::path current;
        try {
            current = sub / "scan.xyz";
            rec.cloud = io::read_cloud(current);
            require_matchable(rec.cloud);
            current = sub / "landmarks.lmk";
            rec.landmarks = io::read_landmarks(current);
            require_valid(rec.landmarks);
            current = sub / "grid.rle";
            auto in = io::detail::open_in(current);
            rec.grid = read_grid(in, current.string());
            if (stamps.contains(id)) rec.enrolled_at = stamps[id].get<std::int64_t>();
        } catch (const Error& e) {
            detail::corrupt(current, e.what());
        } catch (const nlohmann::json::exception& e) {
            detail::corrupt(manifest_path, e.what());
        }

        // The cached grid must be exactly what the scan produces under this config.
        const GridSpec spec = grid_around(rec.cloud, g.config_.voxel_size, g.config_.padding_voxels);
        if (!(voxelize(rec.cloud, spec).grid == rec.grid)) {
            detail::corrupt(sub / "grid.rle", "grid does not match scan under gallery config");
        }
        g.records_.emplace(id, std::move(rec));
    }
    return g;
}

}  // namespace skullid

#endif  // SKULLID_GALLERY_HPP
