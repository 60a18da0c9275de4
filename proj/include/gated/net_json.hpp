#pragma once

#include "json.hpp"

#include "gated/dag.hpp"
#include "gated/network.hpp"

namespace gated {

using json = nlohmann::json;

// Network description format:
//
//   {"units":   [{"id": "x0", "kind": "source"},
//                {"id": "m", "kind": "maxout", "k": 2},
//                {"id": "g", "kind": "shared_rectifier", "copies": [["a", "b"], ["b", "c"]]}],
//    "edges":   [["x0", "m"], ...],
//    "outputs": ["o"]}
//
// Edges into a shared group may be omitted; they are derived from its copies.
// Throws ConfigError on unknown names, unsupported activations, or a graph
// that fails validate_dag.
Dag dag_from_json(const json& doc);
json dag_to_json(const Dag& dag);

// {"seed": 7, "dropout": 0.5 | {"h0": 0.5}, "dropconnect": 0.1 | {"x0->h0": 0.1}}
GateSpec gate_from_json(const json& doc, const Dag& dag);
json gate_to_json(const GateSpec& gate, const Dag& dag);

json active_set_to_json(const ActiveSet& active);
ActiveSet active_set_from_json(const json& doc);

json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& doc);

}  // namespace gated
