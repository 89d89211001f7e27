// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_ERROR_HPP
#define SKULLID_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace skullid {

enum class ErrorCode {
    InvalidArgument,
    ParseError,
    IoError,
    DegenerateLandmarks,
    EmptyCloud,
    AllPointsClipped,
    GridSpecMismatch,
    DegenerateScore,
    DuplicateSubject,
    UnknownSubject,
    EmptyGallery,
    CorruptGallery,
    VersionMismatch,
    NoGenuineTrials,
    NoImpostorTrials,
};

/// Stable lowercase phrase for each code; the CLI prints it after `error: `.
inline constexpr std::string_view reason(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::ParseError: return "parse error";
        case ErrorCode::IoError: return "io error";
        case ErrorCode::DegenerateLandmarks: return "degenerate landmarks";
        case ErrorCode::EmptyCloud: return "empty cloud";
        case ErrorCode::AllPointsClipped: return "all points clipped";
        case ErrorCode::GridSpecMismatch: return "grid spec mismatch";
        case ErrorCode::DegenerateScore: return "degenerate score";
        case ErrorCode::DuplicateSubject: return "duplicate subject";
        case ErrorCode::UnknownSubject: return "unknown subject";
        case ErrorCode::EmptyGallery: return "empty gallery";
        case ErrorCode::CorruptGallery: return "corrupt gallery";
        case ErrorCode::VersionMismatch: return "version mismatch";
        case ErrorCode::NoGenuineTrials: return "no genuine trials";
        case ErrorCode::NoImpostorTrials: return "no impostor trials";
    }
    return "unknown error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(compose(code, detail)), code_(code), detail_(detail) {}

    explicit Error(ErrorCode code) : Error(code, std::string{}) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    static std::string compose(ErrorCode code, const std::string& detail) {
        std::string msg(reason(code));
        if (!detail.empty()) {
            msg += ": ";
            msg += detail;
        }
        return msg;
    }

    ErrorCode code_;
    std::string detail_;
};

}  // namespace skullid

#endif  // SKULLID_ERROR_HPP
