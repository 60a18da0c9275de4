#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gated/dag.hpp"
#include "gated/net_json.hpp"
#include "gated/network.hpp"

namespace gated {

/// What one player saw on one sample of a round.
struct PlayerSample {
  bool active = false;
  double delta = 0.0;
  Eigen::VectorXd input;  // ς_in(j)
  Eigen::VectorXd c1;     // σ_{j↝•}
  Eigen::VectorXd c2;     // σ_out^{A∖{j}}
};

struct SampleRecord {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  ActiveSet active;
  Eigen::VectorXd net_out;
  double network_loss = 0.0;
  std::vector<PlayerSample> players;  // indexed like Signal::players
};

/// Per-player outcome of a round. The round loss is the sample mean over the
/// minibatch, counting only samples on which the player was active.
struct PlayerRound {
  bool active = false;
  Eigen::VectorXd weights;  // w_j^t, the weights played
  Eigen::VectorXd grad;     // averaged ∇ℓ_j^t, zero when inactive
  double loss_pred = 0.0;   // network loss when active
  double loss_grad = 0.0;   // ⟨∇ℓ_j^t, w_j^t⟩ when active
};

struct CogDecision {
  std::string context;
  int function = 0;
  std::uint64_t subset = 0;
  double probability = 1.0;
  bool explored = false;
  double observed_loss = 0.0;
};

struct RoundRecord {
  long t = 0;
  std::vector<SampleRecord> samples;
  std::vector<PlayerRound> players;
  std::optional<CogDecision> cog;
};

/// Ordered round log plus the player table it is indexed by.
struct Signal {
  std::vector<PlayerId> players;
  std::vector<RoundRecord> rounds;

  /// Rounds in [0, prefix) on which player `p` was active; prefix < 0 means all.
  std::vector<std::size_t> active_rounds(std::size_t p, long prefix = -1) const;
  long active_count(std::size_t p, long prefix = -1) const;
};

json round_to_json(const RoundRecord& r);
RoundRecord round_from_json(const json& doc);

/// One JSON object per line, in round order.
void write_signal(std::ostream& out, const Signal& signal);
/// Appends one line.
void write_round(std::ostream& out, const RoundRecord& r);
std::vector<RoundRecord> read_rounds(std::istream& in);

}  // namespace gated
