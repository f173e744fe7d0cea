#include "vowelrec/error.hpp"

namespace vowelrec {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::Configuration: return "configuration";
        case ErrorKind::Format: return "format";
        case ErrorKind::UnsupportedFormat: return "unsupported-format";
        case ErrorKind::EmptyInput: return "empty-input";
        case ErrorKind::TooShort: return "too-short";
        case ErrorKind::Io: return "io";
        case ErrorKind::DegenerateClass: return "degenerate-class";
        case ErrorKind::DegenerateData: return "degenerate-data";
        case ErrorKind::ZeroWithinVariance: return "zero-within-variance";
    }
    return "unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Precondition:
        case ErrorKind::Configuration:
            return 1;
        case ErrorKind::Format:
        case ErrorKind::UnsupportedFormat:
        case ErrorKind::EmptyInput:
        case ErrorKind::TooShort:
        case ErrorKind::Io:
            return 2;
        case ErrorKind::DegenerateClass:
        case ErrorKind::DegenerateData:
        case ErrorKind::ZeroWithinVariance:
            return 3;
    }
    return 3;
}

}  // namespace vowelrec
