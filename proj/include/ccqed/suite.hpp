#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ccqed {

struct SuiteCheck {
  std::string module;
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  /// true: pass when value <= threshold; false: pass when value >= threshold.
  bool upper_bound = true;
  bool pass = false;
  std::string error;  ///< set when the check threw
};

struct SuiteOptions {
  /// Restrict to these modules (empty runs all).
  std::vector<std::string> modules;
  /// Include the two-packet witness asymmetry run (about a minute).
  bool include_slow = true;
  /// Scratch directory for scenario reruns.
  std::filesystem::path work_dir = "suite_work";
};

struct SuiteReport {
  std::vector<SuiteCheck> checks;
  double wall_time_s = 0.0;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Machine-readable pass/fail for the model, analytic, propagator,
/// observable and scenario invariants.
SuiteReport run_invariant_suite(const SuiteOptions& options = {});

}  // namespace ccqed
