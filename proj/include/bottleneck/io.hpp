#pragma once

// Input parsing, CSV formatting, run manifests and atomic file output.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "bottleneck/core_prob.hpp"

namespace bottleneck {

inline constexpr const char* kToolVersion = "0.1.0";

/// {"p_xy": [[...]]} or {"q": [...], "T": [[...]]} (T is n x m,
/// column-stochastic).  Throws std::invalid_argument on malformed input.
JointDistribution parse_joint_json(std::string_view text);

std::string read_file(const std::string& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

/// Shortest representation that round-trips.
std::string format_double(double v);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

struct RunManifest
{
  std::string command;
  std::string input_digest;
  std::map<std::string, std::string> parameters;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

}  // namespace bottleneck
