#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gated {

using UnitId = std::size_t;
using EdgeId = std::size_t;

enum class UnitType {
  Source,
  Linear,
  Rectifier,
  Maxout,
  MaxPool,
  SharedLinearGroup,
  SharedRectifierGroup,
};

/// Type of a unit plus its arity: the number of components of a maxout unit
/// or the number of weight-sharing copies of a shared group. Ignored for the
/// other types.
struct UnitKind {
  UnitType type = UnitType::Linear;
  int arity = 1;

  static UnitKind source() { return {UnitType::Source, 1}; }
  static UnitKind linear() { return {UnitType::Linear, 1}; }
  static UnitKind rectifier() { return {UnitType::Rectifier, 1}; }
  static UnitKind maxout(int k) { return {UnitType::Maxout, k}; }
  static UnitKind max_pool() { return {UnitType::MaxPool, 1}; }
  static UnitKind shared_linear(int copies) { return {UnitType::SharedLinearGroup, copies}; }
  static UnitKind shared_rectifier(int copies) { return {UnitType::SharedRectifierGroup, copies}; }

  bool is_source() const { return type == UnitType::Source; }
  bool is_shared_group() const {
    return type == UnitType::SharedLinearGroup || type == UnitType::SharedRectifierGroup;
  }
  /// Number of players hosted by the unit: k for maxout, 0 for sources and
  /// max-pool units, 1 otherwise.
  int players() const;

  friend bool operator==(const UnitKind&, const UnitKind&) = default;
};

const char* to_string(UnitType type);
std::optional<UnitType> unit_type_from_string(const std::string& name);

/// A player is one weight vector: a unit, or one component of a maxout unit.
struct PlayerId {
  UnitId unit = 0;
  int component = 0;

  friend auto operator<=>(const PlayerId&, const PlayerId&) = default;
};

struct Unit {
  std::string name;
  UnitKind kind;
};

struct Edge {
  UnitId from = 0;
  UnitId to = 0;
};

/// Directed acyclic graph of typed units. Input slots of a non-group unit are
/// ordered by edge insertion; a shared group reads its slots from the ordered
/// input tuple of each copy.
class Dag {
 public:
  UnitId add_unit(std::string name, UnitKind kind);
  EdgeId add_edge(UnitId from, UnitId to);
  void add_output(UnitId unit);
  void set_group_copies(UnitId group, std::vector<std::vector<UnitId>> copies);

  std::size_t size() const { return units_.size(); }
  const std::vector<Unit>& units() const { return units_; }
  const Unit& unit(UnitId id) const { return units_.at(id); }
  const UnitKind& kind(UnitId id) const { return units_.at(id).kind; }
  const std::string& name(UnitId id) const { return units_.at(id).name; }
  std::optional<UnitId> find(const std::string& name) const;

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<EdgeId>& in_edges(UnitId id) const { return in_.at(id); }
  const std::vector<EdgeId>& out_edges(UnitId id) const { return out_.at(id); }
  /// Edge from `from` into `to`, if one exists.
  std::optional<EdgeId> edge_between(UnitId from, UnitId to) const;

  const std::vector<UnitId>& outputs() const { return outputs_; }
  /// Position of `id` among the outputs, if it is one.
  std::optional<std::size_t> output_slot(UnitId id) const;

  /// Ordered input tuples of each copy of a shared group (empty otherwise).
  const std::vector<std::vector<UnitId>>& group_copies(UnitId id) const { return copies_.at(id); }

  /// Length d_j of the weight vector(s) of unit `id`.
  std::size_t indegree(UnitId id) const;

  const std::vector<UnitId>& sources() const { return sources_; }
  /// Index of a source unit within `sources()`.
  std::size_t source_slot(UnitId id) const { return source_slot_.at(id); }
  std::size_t non_source_count() const { return units_.size() - sources_.size(); }

  /// All players in unit order, maxout components consecutively.
  std::vector<PlayerId> players() const;
  std::string player_name(PlayerId p) const;

  /// Kahn order; nullopt when the edges contain a cycle or dangle.
  std::optional<std::vector<UnitId>> try_topological_order() const;
  /// Kahn order; throws std::logic_error on a cyclic graph.
  std::vector<UnitId> topological_order() const;

 private:
  std::vector<Unit> units_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> in_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<UnitId> outputs_;
  std::vector<std::vector<std::vector<UnitId>>> copies_;
  std::vector<UnitId> sources_;
  std::vector<std::size_t> source_slot_;
};

struct Violation {
  std::string kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& kind) const;
};

/// Checks the structural invariants. Violations are reported, never thrown.
ValidationReport validate_dag(const Dag& dag);

}  // namespace gated
