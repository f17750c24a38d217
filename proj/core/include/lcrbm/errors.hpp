#pragma once

#include <stdexcept>
#include <string>

namespace lcrbm {

/// Malformed input file. Message always names the file and line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A non-finite value surfaced during training; carries the diagnostics
/// required to locate the offending update.
class NumericAbort : public std::runtime_error {
public:
    explicit NumericAbort(const std::string& what) : std::runtime_error(what) {}
};

// Process exit codes used by the CLI and the acceptance suite.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;       // unclassified error
inline constexpr int parse_error = 2;   // ParseError / ValidationError
inline constexpr int numeric_abort = 3; // NumericAbort
inline constexpr int oracle_failure = 4;
inline constexpr int skipped = 77;      // required external input unavailable
} // namespace exit_code

} // namespace lcrbm
