#pragma once

#include <stdexcept>
#include <string>

namespace vowelrec {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
    Precondition,     // caller passed arguments outside the documented domain
    Configuration,    // a config value is invalid or inconsistent
    Format,           // malformed input file
    UnsupportedFormat,
    EmptyInput,
    TooShort,         // clip shorter than one analysis frame
    Io,
    DegenerateClass,  // a class has too few observations
    DegenerateData,   // zero variance / non-finite data
    ZeroWithinVariance,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

/// 1 = usage/config, 2 = data, 3 = numerical/degenerate.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace vowelrec
