#pragma once

#include <stdexcept>
#include <string>

namespace gridsec {

inline constexpr const char* kVersion = "0.1.0";

// Input files or case data violated the documented format/invariants.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Run configuration is inconsistent or references missing resources.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical stage failed (singular system, non-convergence, divergence).
struct ComputeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gridsec
