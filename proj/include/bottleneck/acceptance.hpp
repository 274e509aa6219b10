#pragma once

// Acceptance criteria A1-A7, shared by `bottleneck_lab verify` and the
// acceptance test binary.

#include <cstdint>
#include <string>
#include <vector>

namespace bottleneck {

struct CriterionResult
{
  std::string id;
  std::string title;
  bool passed = false;
  /// One-line measured deviations.
  std::string summary;
  /// Per-check lines, printed under the summary.
  std::vector<std::string> details;
  double seconds = 0.0;
};

/// A1: lower entropy sweep vs Mrs. Gerber's Lemma.
CriterionResult check_mgl_exactness();
/// A2: upper entropy sweep vs the Mr. Gerber parametric curve.
CriterionResult check_mr_gerber_exactness();
/// A3: l^2 sweeps vs the Arimoto closed forms in the K-frame.
CriterionResult check_arimoto();
/// A4: exhaustive binary oracle vs sweeps and closed forms.
CriterionResult check_oracle_cross(std::uint64_t seed);
/// A5: matched-channel invariance under marginal perturbation.
CriterionResult check_matched_channels();
/// A6: chi-squared endpoints and bounds.
CriterionResult check_chi_squared();
/// A7: randomized property suites over 200 seeds starting at `seed`.
CriterionResult check_properties(std::uint64_t seed);

/// mgl, mrgl, arimoto, oracle-cross, matched, chi2, properties, all.
const std::vector<std::string>& acceptance_suites();
/// Throws std::invalid_argument for an unknown suite.
std::vector<CriterionResult> run_acceptance_suite(const std::string& suite, std::uint64_t seed);

/// "A1 PASS <title>: <summary>" followed by indented detail lines.
std::string format_result(const CriterionResult& r, bool with_details = true);

}  // namespace bottleneck
