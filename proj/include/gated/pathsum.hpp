#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gated/dag.hpp"
#include "gated/network.hpp"

namespace gated {

/// Brute-force path enumeration over the extended graph: one node per unit,
/// except maxout units which get one node per component. Exponential by
/// design; only meant for small nets.
struct OracleLimits {
  std::size_t max_non_source = 8;
  double max_paths = 1e5;
};

struct XNode {
  UnitId unit = 0;
  int component = 0;
};

struct XEdge {
  std::size_t from = 0;  // node index
  std::size_t to = 0;
  double weight = 0.0;
  bool live = true;      // false if dropped, a max-pool loser, or an inactive group copy
};

/// A path over the extended graph. `units` lists the visited units,
/// `nodes` and `edges` the extended-graph elements (edges.size() + 1 == nodes.size()).
struct Path {
  std::vector<UnitId> units;
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> edges;
};

struct PathSumReport {
  double sigma_in = 0.0;           // paths from sources into j
  Eigen::VectorXd sigma_out;       // paths from j to each output
  Eigen::VectorXd sigma_avoiding;  // source-to-output paths that skip j
  Eigen::VectorXd varsigma_in;     // per input slot of j
};

class PathOracle {
 public:
  /// Throws OracleLimitError when the net is beyond `limits`.
  PathOracle(const Dag& dag, const WeightState& weights, const ActiveSet& active, OracleLimits limits = {});

  /// Paths from any node of `from` to any node of `to`. With `restrict` set,
  /// every node must be active and every edge live.
  std::vector<Path> enumerate_paths(UnitId from, UnitId to, bool restrict) const;

  /// Product of edge weights, times the source weight when the path starts
  /// at a source.
  double path_weight(const Path& path) const;

  double sigma_source_to(UnitId j) const;
  Eigen::VectorXd sigma_to_out(UnitId j) const;
  Eigen::VectorXd sigma_avoiding(UnitId j) const;
  /// Sum over all active source-to-output paths.
  Eigen::VectorXd sigma_out() const;
  /// Input vector of j assembled from path sums of its predecessors.
  Eigen::VectorXd varsigma_in(UnitId j) const;
  /// The value j passes on: ⟨w_j, ς_in(j)⟩ for weighted units, the winner's
  /// path sum for a max-pool unit, the input for a source.
  double unit_value(UnitId j) const;

  PathSumReport report(UnitId j) const;

  const std::vector<XNode>& nodes() const { return nodes_; }
  const std::vector<XEdge>& edges() const { return edges_; }
  bool node_active(std::size_t n) const { return node_active_[n]; }

 private:
  void walk(std::size_t node, const std::vector<bool>& target, const std::vector<bool>& banned, bool restrict,
            std::vector<std::size_t>& nodes, std::vector<std::size_t>& edges, std::vector<Path>& out) const;
  std::vector<bool> node_mask(UnitId u) const;
  std::vector<bool> output_mask() const;
  double sum_paths(const std::vector<bool>& start, const std::vector<bool>& target,
                   const std::vector<bool>& banned, bool with_source) const;

  const Dag& dag_;
  const WeightState& weights_;
  const ActiveSet& active_;
  std::vector<XNode> nodes_;
  std::vector<std::vector<std::size_t>> node_of_unit_;
  std::vector<bool> node_active_;
  std::vector<XEdge> edges_;
  std::vector<std::vector<std::size_t>> out_;
};

/// ς_out − (σ_{j↝•}·⟨w_j, ς_in(j)⟩ + σ_out^{A∖{j}}) for active j, and
/// ς_out − σ_out^{A∖{j}} for inactive j, with ς_out taken from `net_out`.
Eigen::VectorXd check_decomposition(const PathOracle& oracle, const ActiveSet& active, UnitId j,
                                    const Eigen::VectorXd& net_out);

}  // namespace gated
