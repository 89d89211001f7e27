// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_IO_HPP
#define SKULLID_IO_HPP

#include <array>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "skullid/error.hpp"
#include "skullid/geometry.hpp"

namespace skullid::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    if (sep == ' ') {
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
            if (i == s.size()) break;
            std::size_t j = i;
            while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
            out.push_back(s.substr(i, j - i));
            i = j;
        }
        return out;
    }
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

inline std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

inline double parse_double(std::string_view tok, std::string_view source, std::size_t line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError,
                    where(source, line) + ": expected a finite number, got '" + std::string(tok) + "'");
    }
    return v;
}

inline long long parse_int(std::string_view tok, std::string_view source, std::size_t line) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw Error(ErrorCode::ParseError,
                    where(source, line) + ": expected an integer, got '" + std::string(tok) + "'");
    }
    return v;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

}  // namespace detail

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------------------
// XYZ: one `x y z` per line, `#` starts a comment.

inline PointCloud read_xyz(std::istream& in, std::string_view source = "<xyz>") {
    PointCloud cloud;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto tok = detail::split(line, ' ');
        if (tok.size() != 3) {
            throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": expected 3 coordinates, got " +
                                                   std::to_string(tok.size()));
        }
        cloud.points.emplace_back(detail::parse_double(tok[0], source, line_no),
                                  detail::parse_double(tok[1], source, line_no),
                                  detail::parse_double(tok[2], source, line_no));
    }
    return cloud;
}

inline void write_xyz(std::ostream& out, const PointCloud& cloud) {
    for (const auto& p : cloud.points) {
        out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
    }
}

// ---------------------------------------------------------------------------
// ASCII PLY. Only the vertex element's x/y/z are kept; faces and any other
// element are skipped line by line.

inline PointCloud read_ply(std::istream& in, std::string_view source = "<ply>") {
    struct Element {
        std::string name;
        long long count = 0;
        std::vector<std::string> props;
        bool has_list = false;
    };

    std::string raw;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& out) {
        if (!std::getline(in, raw)) return false;
        ++line_no;
        out = detail::trim(raw);
        return true;
    };
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": " + why);
    };

    std::string_view line;
    if (!next_line(line) || line != "ply") fail("missing 'ply' magic");

    std::vector<Element> elements;
    bool have_format = false;
    bool header_done = false;
    while (next_line(line)) {
        if (line.empty()) continue;
        const auto tok = detail::split(line, ' ');
        if (tok[0] == "end_header") {
            header_done = true;
            break;
        }
        if (tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "format") {
            if (tok.size() != 3 || tok[1] != "ascii") fail("only 'format ascii 1.0' is supported");
            have_format = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3) fail("malformed element line");
            const auto count = detail::parse_int(tok[2], source, line_no);
            if (count < 0) fail("negative element count");
            elements.push_back({std::string(tok[1]), count, {}, false});
        } else if (tok[0] == "property") {
            if (elements.empty()) fail("property before any element");
            if (tok.size() >= 2 && tok[1] == "list") {
                if (tok.size() != 5) fail("malformed list property");
                elements.back().has_list = true;
                elements.back().props.emplace_back(tok[4]);
            } else {
                if (tok.size() != 3) fail("malformed property line");
                elements.back().props.emplace_back(tok[2]);
            }
        } else {
            fail("unexpected header keyword '" + std::string(tok[0]) + "'");
        }
    }
    if (!header_done) fail("missing end_header");
    if (!have_format) fail("missing format line");

    PointCloud cloud;
    bool saw_vertex = false;
    for (const auto& el : elements) {
        std::array<int, 3> col{-1, -1, -1};
        const bool is_vertex = el.name == "vertex";
        if (is_vertex) {
            if (el.has_list) fail("list property on vertex element");
            for (std::size_t i = 0; i < el.props.size(); ++i) {
                if (el.props[i] == "x") col[0] = static_cast<int>(i);
                if (el.props[i] == "y") col[1] = static_cast<int>(i);
                if (el.props[i] == "z") col[2] = static_cast<int>(i);
            }
            if (col[0] < 0 || col[1] < 0 || col[2] < 0) fail("vertex element lacks x/y/z properties");
            saw_vertex = true;
            cloud.points.reserve(static_cast<std::size_t>(el.count));
        }
        for (long long k = 0; k < el.count; ++k) {
            do {
                if (!next_line(line)) fail("unexpected end of file in element '" + el.name + "'");
            } while (line.empty());
            if (!is_vertex) continue;
            const auto tok = detail::split(line, ' ');
            if (tok.size() != el.props.size()) {
                fail("expected " + std::to_string(el.props.size()) + " values, got " + std::to_string(tok.size()));
            }
            cloud.points.emplace_back(detail::parse_double(tok[col[0]], source, line_no),
                                      detail::parse_double(tok[col[1]], source, line_no),
                                      detail::parse_double(tok[col[2]], source, line_no));
        }
    }
    if (!saw_vertex) fail("no vertex element");
    return cloud;
}

inline void write_ply(std::ostream& out, const PointCloud& cloud) {
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    write_xyz(out, cloud);
}

// ---------------------------------------------------------------------------
// Landmarks: three `role,x,y,z` lines, roles left/right/apex in any order.

inline LandmarkTriple read_landmarks(std::istream& in, std::string_view source = "<lmk>") {
    LandmarkTriple lm;
    std::array<bool, 3> seen{false, false, false};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto tok = detail::split(line, ',');
        if (tok.size() != 4) {
            throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": expected role,x,y,z");
        }
        std::size_t role = 3;
        for (std::size_t r = 0; r < 3; ++r) {
            if (tok[0] == LandmarkTriple::kRoles[r]) role = r;
        }
        if (role == 3) {
            throw Error(ErrorCode::ParseError,
                        detail::where(source, line_no) + ": unknown landmark role '" + std::string(tok[0]) + "'");
        }
        if (seen[role]) {
            throw Error(ErrorCode::ParseError,
                        detail::where(source, line_no) + ": duplicate landmark role '" + std::string(tok[0]) + "'");
        }
        seen[role] = true;
        lm[role] = Point3(detail::parse_double(tok[1], source, line_no), detail::parse_double(tok[2], source, line_no),
                          detail::parse_double(tok[3], source, line_no));
    }
    for (std::size_t r = 0; r < 3; ++r) {
        if (!seen[r]) {
            throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": missing landmark role '" +
                                                   std::string(LandmarkTriple::kRoles[r]) + "'");
        }
    }
    return lm;
}

inline void write_landmarks(std::ostream& out, const LandmarkTriple& lm) {
    for (std::size_t r = 0; r < 3; ++r) {
        out << LandmarkTriple::kRoles[r] << ',' << format_double(lm[r].x()) << ',' << format_double(lm[r].y()) << ','
            << format_double(lm[r].z()) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Path helpers.

inline PointCloud read_cloud(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    const auto ext = path.extension().string();
    if (ext == ".ply" || ext == ".PLY") return read_ply(in, path.string());
    return read_xyz(in, path.string());
}

inline void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
    auto out = detail::open_out(path);
    const auto ext = path.extension().string();
    if (ext == ".ply" || ext == ".PLY") {
        write_ply(out, cloud);
    } else {
        write_xyz(out, cloud);
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

inline LandmarkTriple read_landmarks(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    return read_landmarks(in, path.string());
}

inline void write_landmarks(const std::filesystem::path& path, const LandmarkTriple& lm) {
    auto out = detail::open_out(path);
    write_landmarks(out, lm);
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace skullid::io

#endif  // SKULLID_IO_HPP
