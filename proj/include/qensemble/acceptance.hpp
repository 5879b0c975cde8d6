#pragma once

#include <string>
#include <vector>

#include "qensemble/parallel.hpp"

namespace qens {

struct CriterionResult {
  std::string id;
  std::string title;
  bool passed = false;
  /// Deterministic summary of the measured quantities.
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Test hook: propagate with a wrong dispersion coefficient.
  bool corrupt_dispersion = false;
  Exec exec = Exec::parallel;
};

/// The eleven acceptance checks, AC1..AC11.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// Per-module property checks (INV-*).
std::vector<CriterionResult> run_invariants(const AcceptanceOptions& opts = {});

/// "PASS [AC1] title: detail"
std::string format_result(const CriterionResult& r);

}  // namespace qens
