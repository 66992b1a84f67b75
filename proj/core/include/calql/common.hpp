#pragma once

#include <stdexcept>
#include <string>

namespace calql {

/// Error kinds named by the failure they report. Every throwing operation in
/// the library raises calql::Error with one of these, so callers can match on
/// kind instead of parsing messages.
enum class ErrorKind {
    StepAfterDone,
    SingularSystem,
    Unsolvable,
    EmptyDataset,
    EmptyOnlineStore,
    EmptyOfflineStore,
    MissingReference,
    ShapeMismatch,
    NoTape,
    EmptyGrid,
    InvalidArgument,
    ParseError,
    IoError,
};

struct Error : std::runtime_error {
    ErrorKind kind;
    Error(ErrorKind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::StepAfterDone: return "StepAfterDone";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::Unsolvable: return "Unsolvable";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::EmptyOnlineStore: return "EmptyOnlineStore";
        case ErrorKind::EmptyOfflineStore: return "EmptyOfflineStore";
        case ErrorKind::MissingReference: return "MissingReference";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::NoTape: return "NoTape";
        case ErrorKind::EmptyGrid: return "EmptyGrid";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

[[noreturn]] inline void fail(ErrorKind k, const std::string& what) {
    throw Error(k, std::string(error_kind_name(k)) + ": " + what);
}

inline void require(bool cond, ErrorKind k, const std::string& what) {
    if (!cond) fail(k, what);
}

}  // namespace calql
