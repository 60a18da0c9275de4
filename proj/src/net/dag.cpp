#include "gated/dag.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>

namespace gated {

int UnitKind::players() const {
  switch (type) {
    case UnitType::Source:
    case UnitType::MaxPool:
      return 0;
    case UnitType::Maxout:
      return arity;
    default:
      return 1;
  }
}

const char* to_string(UnitType type) {
  switch (type) {
    case UnitType::Source: return "source";
    case UnitType::Linear: return "linear";
    case UnitType::Rectifier: return "rectifier";
    case UnitType::Maxout: return "maxout";
    case UnitType::MaxPool: return "max_pool";
    case UnitType::SharedLinearGroup: return "shared_linear";
    case UnitType::SharedRectifierGroup: return "shared_rectifier";
  }
  return "unknown";
}

std::optional<UnitType> unit_type_from_string(const std::string& name) {
  static const std::pair<const char*, UnitType> table[] = {
      {"source", UnitType::Source},
      {"linear", UnitType::Linear},
      {"rectifier", UnitType::Rectifier},
      {"relu", UnitType::Rectifier},
      {"maxout", UnitType::Maxout},
      {"max_pool", UnitType::MaxPool},
      {"maxpool", UnitType::MaxPool},
      {"shared_linear", UnitType::SharedLinearGroup},
      {"shared_rectifier", UnitType::SharedRectifierGroup},
  };
  for (const auto& [key, type] : table) {
    if (name == key) return type;
  }
  return std::nullopt;
}

UnitId Dag::add_unit(std::string name, UnitKind kind) {
  const UnitId id = units_.size();
  if (name.empty()) name = "u" + std::to_string(id);
  units_.push_back({std::move(name), kind});
  in_.emplace_back();
  out_.emplace_back();
  copies_.emplace_back();
  if (kind.is_source()) {
    source_slot_.push_back(sources_.size());
    sources_.push_back(id);
  } else {
    source_slot_.push_back(static_cast<std::size_t>(-1));
  }
  return id;
}

EdgeId Dag::add_edge(UnitId from, UnitId to) {
  const EdgeId id = edges_.size();
  edges_.push_back({from, to});
  // Dangling endpoints are kept in the edge list and reported by validate_dag.
  if (from < units_.size() && to < units_.size()) {
    out_[from].push_back(id);
    in_[to].push_back(id);
  }
  return id;
}

void Dag::add_output(UnitId unit) { outputs_.push_back(unit); }

void Dag::set_group_copies(UnitId group, std::vector<std::vector<UnitId>> copies) {
  copies_.at(group) = std::move(copies);
}

std::optional<UnitId> Dag::find(const std::string& name) const {
  for (UnitId i = 0; i < units_.size(); ++i) {
    if (units_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<EdgeId> Dag::edge_between(UnitId from, UnitId to) const {
  if (to >= units_.size()) return std::nullopt;
  for (EdgeId e : in_[to]) {
    if (edges_[e].from == from) return e;
  }
  return std::nullopt;
}

std::optional<std::size_t> Dag::output_slot(UnitId id) const {
  auto it = std::find(outputs_.begin(), outputs_.end(), id);
  if (it == outputs_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - outputs_.begin());
}

std::size_t Dag::indegree(UnitId id) const {
  const auto& k = kind(id);
  if (k.is_shared_group()) {
    const auto& c = copies_.at(id);
    return c.empty() ? 0 : c.front().size();
  }
  return in_.at(id).size();
}

std::vector<PlayerId> Dag::players() const {
  std::vector<PlayerId> out;
  for (UnitId i = 0; i < units_.size(); ++i) {
    for (int c = 0; c < units_[i].kind.players(); ++c) out.push_back({i, c});
  }
  return out;
}

std::string Dag::player_name(PlayerId p) const {
  if (kind(p.unit).type == UnitType::Maxout) return name(p.unit) + ":" + std::to_string(p.component);
  return name(p.unit);
}

std::optional<std::vector<UnitId>> Dag::try_topological_order() const {
  const std::size_t n = units_.size();
  std::vector<std::size_t> pending(n, 0);
  for (const auto& e : edges_) {
    if (e.from >= n || e.to >= n) return std::nullopt;
    ++pending[e.to];
  }
  // Min-heap keeps the order deterministic and biased towards low ids.
  std::priority_queue<UnitId, std::vector<UnitId>, std::greater<>> ready;
  for (UnitId i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<UnitId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const UnitId u = ready.top();
    ready.pop();
    order.push_back(u);
    for (EdgeId e : out_[u]) {
      if (--pending[edges_[e].to] == 0) ready.push(edges_[e].to);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

std::vector<UnitId> Dag::topological_order() const {
  auto order = try_topological_order();
  if (!order) throw std::logic_error("dag: graph is not acyclic");
  return *order;
}

bool ValidationReport::has(const std::string& kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate_dag(const Dag& dag) {
  ValidationReport report;
  auto flag = [&](std::string kind, std::string detail) {
    report.violations.push_back({std::move(kind), std::move(detail)});
  };
  const std::size_t n = dag.size();
  auto label = [&](UnitId id) { return id < n ? dag.name(id) : "#" + std::to_string(id); };

  bool dangling = false;
  std::set<std::pair<UnitId, UnitId>> seen;
  for (EdgeId e = 0; e < dag.edges().size(); ++e) {
    const auto& edge = dag.edges()[e];
    if (edge.from >= n || edge.to >= n) {
      flag("unknown unit", "edge " + std::to_string(e) + " references " + label(edge.from) + "->" +
                               label(edge.to));
      dangling = true;
      continue;
    }
    if (edge.from == edge.to) flag("cycle", "self loop on " + label(edge.from));
    if (!seen.insert({edge.from, edge.to}).second) {
      flag("duplicate edge", label(edge.from) + "->" + label(edge.to));
    }
  }
  if (!dangling && !dag.try_topological_order()) {
    flag("cycle", "edges contain a directed cycle");
  }

  for (UnitId i = 0; i < n; ++i) {
    const auto& kind = dag.kind(i);
    const auto& in = dag.in_edges(i);
    if (kind.is_source()) {
      if (!in.empty()) flag("source with inputs", label(i));
      continue;
    }
    if (in.empty()) flag("non-source with no inputs", label(i));
    if (kind.type == UnitType::Maxout && kind.arity < 2) {
      flag("maxout arity", label(i) + " has k=" + std::to_string(kind.arity));
    }
    if (kind.is_shared_group()) {
      const auto& copies = dag.group_copies(i);
      if (kind.arity < 1 || copies.size() != static_cast<std::size_t>(kind.arity)) {
        flag("group copies", label(i) + " declares " + std::to_string(kind.arity) + " copies, has " +
                                 std::to_string(copies.size()));
      }
      std::set<UnitId> used;
      for (const auto& tuple : copies) {
        if (tuple.empty() || tuple.size() != copies.front().size()) {
          flag("group tuple", label(i) + " has copies of unequal or zero length");
        }
        for (UnitId u : tuple) {
          used.insert(u);
          if (!dag.edge_between(u, i)) flag("group tuple", label(u) + " feeds " + label(i) + " without an edge");
        }
      }
      for (EdgeId e : in) {
        if (!used.count(dag.edges()[e].from)) {
          flag("group tuple", "edge " + label(dag.edges()[e].from) + "->" + label(i) + " unused by any copy");
        }
      }
    } else if (!dag.group_copies(i).empty()) {
      flag("group tuple", label(i) + " is not a shared group but has copies");
    }
  }

  if (dag.outputs().empty()) flag("no outputs", "dag declares no output units");
  std::set<UnitId> outs;
  for (UnitId o : dag.outputs()) {
    if (o >= n) {
      flag("unknown unit", "output " + label(o));
      continue;
    }
    if (!outs.insert(o).second) flag("duplicate output", label(o));
  }

  // Forward reachability from the sources.
  if (!dangling) {
    std::vector<bool> reached(n, false);
    std::vector<UnitId> stack(dag.sources().begin(), dag.sources().end());
    for (UnitId s : stack) reached[s] = true;
    while (!stack.empty()) {
      const UnitId u = stack.back();
      stack.pop_back();
      for (EdgeId e : dag.out_edges(u)) {
        const UnitId v = dag.edges()[e].to;
        if (!reached[v]) {
          reached[v] = true;
          stack.push_back(v);
        }
      }
    }
    for (UnitId o : outs) {
      if (!reached[o]) flag("unreachable output", label(o));
    }
  }
  return report;
}

}  // namespace gated
