#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psomodes {

enum class ErrorCode {
    InvalidArgument,
    // pso_core
    SingularMassMatrix,
    SolverFailure,
    SingularAtPoint,
    RankDeficientPorts,
    LossyModel,
    // pso_compose
    NotInvertible,
    DuplicateLabel,
    OverConstrained,
    RankAmbiguity,
    // circuit_graph
    DisconnectedGraph,
    NonPositiveImpedance,
    // netlist
    SyntaxError,
    UnknownUnit,
    DuplicateName,
    MissingParameter,
    UnresolvedParameter,
    DegenerateDiscretization,
    UnresolvedTap,
    // microwave
    PoleAtPoint,
    WindowContainsResonance,
    ResonantPoint,
    // analysis
    EmptyRegion,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularMassMatrix: return "SingularMassMatrix";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::SingularAtPoint: return "SingularAtPoint";
    case ErrorCode::RankDeficientPorts: return "RankDeficientPorts";
    case ErrorCode::LossyModel: return "LossyModel";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::OverConstrained: return "OverConstrained";
    case ErrorCode::RankAmbiguity: return "RankAmbiguity";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::NonPositiveImpedance: return "NonPositiveImpedance";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::UnresolvedParameter: return "UnresolvedParameter";
    case ErrorCode::DegenerateDiscretization: return "DegenerateDiscretization";
    case ErrorCode::UnresolvedTap: return "UnresolvedTap";
    case ErrorCode::PoleAtPoint: return "PoleAtPoint";
    case ErrorCode::WindowContainsResonance: return "WindowContainsResonance";
    case ErrorCode::ResonantPoint: return "ResonantPoint";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    }
    return "Unknown";
}

/// Position inside a netlist source; line and column are 1-based, 0 means unknown.
struct Location {
    int line = 0;
    int column = 0;
};

/// Every failure raised by the library. The code is stable and machine readable;
/// the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, Location where = {})
        : std::runtime_error(format(code, message, where)), code_(code), where_(where), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    Location where() const noexcept { return where_; }
    const std::string& detail() const noexcept { return detail_; }

    /// True for errors that come from reading a netlist rather than from numerics.
    bool is_parse_error() const noexcept {
        switch (code_) {
        case ErrorCode::SyntaxError:
        case ErrorCode::UnknownUnit:
        case ErrorCode::DuplicateName:
        case ErrorCode::MissingParameter:
        case ErrorCode::UnresolvedParameter:
        case ErrorCode::UnresolvedTap:
            return true;
        default:
            return false;
        }
    }

private:
    static std::string format(ErrorCode code, const std::string& message, Location where) {
        std::string out(to_string(code));
        if (where.line > 0) {
            out += " at " + std::to_string(where.line) + ":" + std::to_string(where.column);
        }
        out += ": " + message;
        return out;
    }

    ErrorCode code_;
    Location where_;
    std::string detail_;
};

} // namespace psomodes
