#pragma once

// End-to-end acceptance checks shared by the test binary and `zel selfcheck`.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace zel {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::vector<std::string> details;  // one measured quantity per entry
  double seconds = 0.0;
};

struct AcceptanceConfig {
  bool quick = false;  // skip the long tail sweep
  std::optional<std::filesystem::path> artifact_dir;  // determinism artifacts go here
  int workers = 0;
  std::vector<int> only;  // empty: every criterion
};

/// Runs the criteria in order; `report` (if set) receives each result as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& cfg,
                                            const std::function<void(const CriterionResult&)>& report = {});

/// "PASS 3 name | detail; detail" style single line.
std::string format_result_line(const CriterionResult& r);

}  // namespace zel
