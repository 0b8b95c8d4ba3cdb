#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "relpose/scenario.hpp"

namespace relpose {

/// Outcome of one acceptance check.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured numbers backing the verdict
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  double wall_seconds = 0.0;

  bool all_passed() const;
};

/// Runs the ten acceptance checks in order against the built-in
/// demonstration scenario.  Every tolerance is pinned in the implementation;
/// the checks are deterministic (fixed seeds).  When `log` is non-null each
/// criterion prints one PASS/FAIL line as it finishes.
AcceptanceReport run_acceptance(std::ostream* log = nullptr);

/// Same checks with a caller-supplied base scenario: convergence criteria
/// that hold for the demonstration setup will fail, by name, for a
/// mistuned one.
AcceptanceReport run_acceptance(const ScenarioConfig& base,
                                std::ostream* log = nullptr);

/// Machine-readable form of the report.
std::string acceptance_report_json(const AcceptanceReport& report);

}  // namespace relpose
