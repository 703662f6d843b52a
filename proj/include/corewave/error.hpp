#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corewave {

enum class ErrorCode {
    // wavelet
    InvalidOrder,
    UnknownFamily,
    SignalTooShort,
    NonFiniteInput,
    LevelOutOfRange,
    EmptyInput,
    // stats
    DegenerateSeries,
    TooFewObservations,
    Misaligned,
    ZeroDenominator,
    // estimators
    NonPositiveIndex,
    TooShort,
    AllExcluded,
    UnknownComponent,
    InvalidPanel,
    InvalidTrim,
    WindowTooLarge,
    InvalidGain,
    NonConvergence,
    // econometrics
    RankDeficient,
    DimensionMismatch,
    DegenerateResiduals,
    HorizonTooLarge,
    CoreEqualsParent,
    // selection
    LevelCapExceeded,
    InvalidThreshold,
    // pipeline
    MalformedRow,
    NonContiguousDates,
    EmptyFile,
    WeightSumOutOfRange,
    ConfigError,
    IoError,
};

/// Broad class of a failure; drives the CLI exit code.
enum class ErrorCategory { config, data, numerical };

inline constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidOrder: return "InvalidOrder";
        case ErrorCode::UnknownFamily: return "UnknownFamily";
        case ErrorCode::SignalTooShort: return "SignalTooShort";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DegenerateSeries: return "DegenerateSeries";
        case ErrorCode::TooFewObservations: return "TooFewObservations";
        case ErrorCode::Misaligned: return "Misaligned";
        case ErrorCode::ZeroDenominator: return "ZeroDenominator";
        case ErrorCode::NonPositiveIndex: return "NonPositiveIndex";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::AllExcluded: return "AllExcluded";
        case ErrorCode::UnknownComponent: return "UnknownComponent";
        case ErrorCode::InvalidPanel: return "InvalidPanel";
        case ErrorCode::InvalidTrim: return "InvalidTrim";
        case ErrorCode::WindowTooLarge: return "WindowTooLarge";
        case ErrorCode::InvalidGain: return "InvalidGain";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DegenerateResiduals: return "DegenerateResiduals";
        case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
        case ErrorCode::CoreEqualsParent: return "CoreEqualsParent";
        case ErrorCode::LevelCapExceeded: return "LevelCapExceeded";
        case ErrorCode::InvalidThreshold: return "InvalidThreshold";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonContiguousDates: return "NonContiguousDates";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::WeightSumOutOfRange: return "WeightSumOutOfRange";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

inline constexpr ErrorCategory category_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidOrder:
        case ErrorCode::UnknownFamily:
        case ErrorCode::LevelOutOfRange:
        case ErrorCode::InvalidTrim:
        case ErrorCode::WindowTooLarge:
        case ErrorCode::InvalidGain:
        case ErrorCode::LevelCapExceeded:
        case ErrorCode::InvalidThreshold:
        case ErrorCode::ConfigError:
            return ErrorCategory::config;
        case ErrorCode::NonConvergence:
        case ErrorCode::RankDeficient:
        case ErrorCode::DegenerateResiduals:
        case ErrorCode::CoreEqualsParent:
        case ErrorCode::DegenerateSeries:
        case ErrorCode::ZeroDenominator:
            return ErrorCategory::numerical;
        default:
            return ErrorCategory::data;
    }
}

/**
 * Library-wide exception. Carries a machine-readable code and, once it has
 * passed through the pipeline, the measure and stage it was raised in.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }
    const std::string& measure() const noexcept { return measure_; }
    const std::string& stage() const noexcept { return stage_; }

    /// Returns a copy tagged with (measure, stage); the message gains a prefix.
    Error tagged(std::string measure, std::string stage) const {
        Error out(code_, "(" + measure + ", " + stage + ") " + detail_message());
        out.measure_ = std::move(measure);
        out.stage_ = std::move(stage);
        return out;
    }

private:
    std::string detail_message() const {
        std::string full = what();
        auto pos = full.find(": ");
        return pos == std::string::npos ? full : full.substr(pos + 2);
    }

    ErrorCode code_;
    std::string measure_;
    std::string stage_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace corewave
