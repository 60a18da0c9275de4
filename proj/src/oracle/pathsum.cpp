#include "gated/pathsum.hpp"

#include <string>

#include "gated/errors.hpp"

namespace gated {

PathOracle::PathOracle(const Dag& dag, const WeightState& weights, const ActiveSet& active, OracleLimits limits)
    : dag_(dag), weights_(weights), active_(active) {
  if (dag.non_source_count() > limits.max_non_source) {
    throw OracleLimitError("oracle: " + std::to_string(dag.non_source_count()) + " non-source units exceed the cap of " +
                           std::to_string(limits.max_non_source));
  }
  node_of_unit_.resize(dag.size());
  for (UnitId u = 0; u < dag.size(); ++u) {
    const auto& kind = dag.kind(u);
    const int copies = kind.type == UnitType::Maxout ? kind.arity : 1;
    for (int c = 0; c < copies; ++c) {
      node_of_unit_[u].push_back(nodes_.size());
      nodes_.push_back({u, c});
      bool on = active.unit_active[u];
      if (kind.type == UnitType::Maxout) on = on && active.maxout_winner[u] == c;
      node_active_.push_back(on);
    }
  }
  out_.resize(nodes_.size());

  auto link = [&](std::size_t from, std::size_t to, double w, bool live) {
    out_[from].push_back(edges_.size());
    edges_.push_back({from, to, w, live});
  };

  for (UnitId v = 0; v < dag.size(); ++v) {
    const auto& kind = dag.kind(v);
    const auto& in = dag.in_edges(v);
    if (kind.is_shared_group()) {
      const auto& w = weights.w[v][0];
      const auto& copies = dag.group_copies(v);
      for (std::size_t c = 0; c < copies.size(); ++c) {
        const bool copy_on = c < active.group_active[v].size() && active.group_active[v][c];
        for (std::size_t p = 0; p < copies[c].size(); ++p) {
          const UnitId u = copies[c][p];
          const bool kept = active.edge_keep[*dag.edge_between(u, v)];
          for (std::size_t from : node_of_unit_[u]) {
            link(from, node_of_unit_[v][0], w[static_cast<Eigen::Index>(p)], kept && copy_on);
          }
        }
      }
      continue;
    }
    for (std::size_t p = 0; p < in.size(); ++p) {
      const EdgeId e = in[p];
      const UnitId u = dag.edges()[e].from;
      const bool kept = active.edge_keep[e];
      for (std::size_t from : node_of_unit_[u]) {
        switch (kind.type) {
          case UnitType::Maxout:
            for (int c = 0; c < kind.arity; ++c) {
              link(from, node_of_unit_[v][static_cast<std::size_t>(c)],
                   weights.w[v][static_cast<std::size_t>(c)][static_cast<Eigen::Index>(p)], kept);
            }
            break;
          case UnitType::MaxPool:
            link(from, node_of_unit_[v][0], 1.0, kept && active.pool_winner[v] == static_cast<long>(u));
            break;
          default:
            link(from, node_of_unit_[v][0], weights.w[v][0][static_cast<Eigen::Index>(p)], kept);
            break;
        }
      }
    }
  }

  // Path count over the whole extended graph, by dynamic programming in
  // topological order of units (nodes of a unit share its position).
  std::vector<double> count(nodes_.size(), 1.0);
  double total = 0.0;
  for (UnitId u : dag.topological_order()) {
    for (std::size_t n : node_of_unit_[u]) {
      total += count[n];
      for (std::size_t e : out_[n]) count[edges_[e].to] += count[n];
    }
  }
  if (total > limits.max_paths) {
    throw OracleLimitError("oracle: " + std::to_string(static_cast<long long>(total)) +
                           " paths exceed the cap of " + std::to_string(static_cast<long long>(limits.max_paths)));
  }
}

std::vector<bool> PathOracle::node_mask(UnitId u) const {
  std::vector<bool> mask(nodes_.size(), false);
  for (std::size_t n : node_of_unit_.at(u)) mask[n] = true;
  return mask;
}

std::vector<bool> PathOracle::output_mask() const {
  std::vector<bool> mask(nodes_.size(), false);
  for (UnitId o : dag_.outputs()) {
    for (std::size_t n : node_of_unit_[o]) mask[n] = true;
  }
  return mask;
}

void PathOracle::walk(std::size_t node, const std::vector<bool>& target, const std::vector<bool>& banned,
                      bool restrict, std::vector<std::size_t>& nodes, std::vector<std::size_t>& edges,
                      std::vector<Path>& out) const {
  if (banned[node] || (restrict && !node_active_[node])) return;
  nodes.push_back(node);
  if (target[node]) {
    Path p;
    for (std::size_t n : nodes) p.units.push_back(nodes_[n].unit);
    p.nodes = nodes;
    p.edges = edges;
    out.push_back(std::move(p));
  }
  for (std::size_t e : out_[node]) {
    if (restrict && !edges_[e].live) continue;
    edges.push_back(e);
    walk(edges_[e].to, target, banned, restrict, nodes, edges, out);
    edges.pop_back();
  }
  nodes.pop_back();
}

std::vector<Path> PathOracle::enumerate_paths(UnitId from, UnitId to, bool restrict) const {
  std::vector<Path> out;
  const auto target = node_mask(to);
  const std::vector<bool> banned(nodes_.size(), false);
  std::vector<std::size_t> nodes, edges;
  for (std::size_t n : node_of_unit_.at(from)) walk(n, target, banned, restrict, nodes, edges, out);
  return out;
}

double PathOracle::path_weight(const Path& path) const {
  double w = 1.0;
  for (std::size_t e : path.edges) w *= edges_[e].weight;
  const UnitId start = nodes_[path.nodes.front()].unit;
  if (dag_.kind(start).is_source()) w *= weights_.input[static_cast<Eigen::Index>(dag_.source_slot(start))];
  return w;
}

double PathOracle::sum_paths(const std::vector<bool>& start, const std::vector<bool>& target,
                             const std::vector<bool>& banned, bool with_source) const {
  double total = 0.0;
  std::vector<Path> paths;
  std::vector<std::size_t> nodes, edges;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (start[n]) walk(n, target, banned, true, nodes, edges, paths);
  }
  for (const auto& p : paths) {
    if (with_source) {
      total += path_weight(p);
    } else {
      double w = 1.0;
      for (std::size_t e : p.edges) w *= edges_[e].weight;
      total += w;
    }
  }
  return total;
}

double PathOracle::sigma_source_to(UnitId j) const {
  std::vector<bool> start(nodes_.size(), false);
  for (UnitId s : dag_.sources()) start[node_of_unit_[s][0]] = true;
  return sum_paths(start, node_mask(j), std::vector<bool>(nodes_.size(), false), true);
}

Eigen::VectorXd PathOracle::sigma_to_out(UnitId j) const {
  const auto& outs = dag_.outputs();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outs.size()));
  const auto start = node_mask(j);
  const std::vector<bool> none(nodes_.size(), false);
  for (std::size_t k = 0; k < outs.size(); ++k) {
    v[static_cast<Eigen::Index>(k)] = sum_paths(start, node_mask(outs[k]), none, false);
  }
  return v;
}

Eigen::VectorXd PathOracle::sigma_avoiding(UnitId j) const {
  const auto& outs = dag_.outputs();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outs.size()));
  std::vector<bool> start(nodes_.size(), false);
  for (UnitId s : dag_.sources()) start[node_of_unit_[s][0]] = true;
  const auto banned = node_mask(j);
  for (std::size_t k = 0; k < outs.size(); ++k) {
    v[static_cast<Eigen::Index>(k)] = sum_paths(start, node_mask(outs[k]), banned, true);
  }
  return v;
}

Eigen::VectorXd PathOracle::sigma_out() const {
  const auto& outs = dag_.outputs();
  Eigen::VectorXd v(static_cast<Eigen::Index>(outs.size()));
  for (std::size_t k = 0; k < outs.size(); ++k) v[static_cast<Eigen::Index>(k)] = sigma_source_to(outs[k]);
  return v;
}

Eigen::VectorXd PathOracle::varsigma_in(UnitId j) const {
  const auto& kind = dag_.kind(j);
  if (kind.is_source()) return Eigen::VectorXd();
  if (kind.is_shared_group()) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dag_.indegree(j)));
    const auto& copies = dag_.group_copies(j);
    for (std::size_t c = 0; c < copies.size(); ++c) {
      if (c >= active_.group_active[j].size() || !active_.group_active[j][c]) continue;
      for (std::size_t p = 0; p < copies[c].size(); ++p) {
        if (active_.edge_keep[*dag_.edge_between(copies[c][p], j)]) {
          v[static_cast<Eigen::Index>(p)] += sigma_source_to(copies[c][p]);
        }
      }
    }
    return v;
  }
  const auto& in = dag_.in_edges(j);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(in.size()));
  for (std::size_t p = 0; p < in.size(); ++p) {
    if (active_.edge_keep[in[p]]) v[static_cast<Eigen::Index>(p)] = sigma_source_to(dag_.edges()[in[p]].from);
  }
  return v;
}

double PathOracle::unit_value(UnitId j) const {
  const auto& kind = dag_.kind(j);
  if (kind.is_source()) return weights_.input[static_cast<Eigen::Index>(dag_.source_slot(j))];
  const Eigen::VectorXd in = varsigma_in(j);
  switch (kind.type) {
    case UnitType::MaxPool: {
      const auto& edges = dag_.in_edges(j);
      for (std::size_t p = 0; p < edges.size(); ++p) {
        if (static_cast<long>(dag_.edges()[edges[p]].from) == active_.pool_winner[j]) {
          return in[static_cast<Eigen::Index>(p)];
        }
      }
      return 0.0;
    }
    case UnitType::Maxout: {
      const int c = std::max(active_.maxout_winner[j], 0);
      return weights_.w[j][static_cast<std::size_t>(c)].dot(in);
    }
    default:
      return weights_.w[j][0].dot(in);
  }
}

PathSumReport PathOracle::report(UnitId j) const {
  return {sigma_source_to(j), sigma_to_out(j), sigma_avoiding(j), varsigma_in(j)};
}

Eigen::VectorXd check_decomposition(const PathOracle& oracle, const ActiveSet& active, UnitId j,
                                    const Eigen::VectorXd& net_out) {
  Eigen::VectorXd rest = oracle.sigma_avoiding(j);
  if (active.unit_active.at(j)) rest += oracle.sigma_to_out(j) * oracle.unit_value(j);
  return net_out - rest;
}

}  // namespace gated
