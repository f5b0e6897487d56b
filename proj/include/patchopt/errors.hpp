#pragma once

#include <stdexcept>
#include <string>

namespace patchopt {

// Bad caller input (dimension mismatch, malformed arguments).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problem too large for the requested exhaustive operation.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Model cannot be built or has no admissible state (empty node, infeasible
// cost system).
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file contents; carries the byte offset where parsing failed.
struct FormatError : std::runtime_error {
    FormatError(const std::string& msg, long offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
    long byte_offset;
};

}  // namespace patchopt
