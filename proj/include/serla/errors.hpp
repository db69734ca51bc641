#pragma once

#include <stdexcept>
#include <string>

namespace serla {

// Precondition or invariant violated by the caller.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// A loss or parameter became non-finite during training.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// File exists but does not parse as the expected format.
struct MalformedFileError : IoError {
    explicit MalformedFileError(const std::string& msg) : IoError(msg) {}
};

// File parses but was written by an incompatible format version.
struct VersionMismatchError : IoError {
    explicit VersionMismatchError(const std::string& msg) : IoError(msg) {}
};

// File parses but its header disagrees with the expected env spec / config.
struct SpecMismatchError : IoError {
    explicit SpecMismatchError(const std::string& msg) : IoError(msg) {}
};

// Environment/controller constants are inconsistent (e.g. the scripted
// expert cannot solve the task it was tuned for).
struct ConfigurationError : std::runtime_error {
    explicit ConfigurationError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

}  // namespace serla
