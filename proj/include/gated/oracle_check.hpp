#pragma once

#include <cstdint>
#include <iosfwd>

#include "gated/dag.hpp"
#include "gated/network.hpp"

namespace gated {

struct OracleCheckReport {
  long trials = 0;
  long failures = 0;
  double max_output_gap = 0.0;         // feedforward vs active path sums
  double max_decomposition = 0.0;      // decomposition residual, every unit
  double max_delta_gap = 0.0;          // δ_j vs ⟨g, σ_{j↝•}⟩
  double max_grad_gap = 0.0;           // ⟨∇ℓ_j, w_j⟩ vs δ_j·σ_{•↝j}
  double max_input_gap = 0.0;          // engine ς_in vs oracle ς_in

  bool passed(double tol = 1e-9) const;
  void print(std::ostream& out) const;
};

/// Draws `trials` random weight/input settings for `dag` (weights and inputs
/// uniform on [−scale, scale] and [−1, 1]), gates them with `gate`, and
/// compares the engine against brute-force path sums. Throws
/// OracleLimitError when the net is too large to enumerate.
OracleCheckReport oracle_check(const Dag& dag, const GateSpec& gate, long trials, std::uint64_t seed,
                               double scale = 1.0, double tol = 1e-9);

}  // namespace gated
