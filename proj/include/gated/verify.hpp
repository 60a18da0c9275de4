#pragma once

#include <string>
#include <vector>

#include "gated/net_json.hpp"

namespace gated {

struct CheckResult {
  std::string name;
  std::string subject;  // player name, checkpoint, or "run"
  bool passed = true;
  bool skipped = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  void print(std::ostream& out) const;
};

/// Re-derives every reported quantity from the logged signal and checks it
/// against the summary: regret and ε values, ε = regret, observed bound
/// maxima, the regret bounds, the gating contract, replay consistency,
/// checkpoint monotonicity and the gain-gradient identities.
/// Throws ConfigError when the files cannot be read.
VerifyReport verify_summary(const std::string& summary_path);
VerifyReport verify_summary(const json& summary, const std::string& signal_path);

}  // namespace gated
