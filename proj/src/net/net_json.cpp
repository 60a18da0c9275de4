#include "gated/net_json.hpp"

#include <set>

#include "gated/errors.hpp"

namespace gated {

namespace {

UnitId lookup(const Dag& dag, const json& name) {
  if (!name.is_string()) throw ConfigError("dag: unit reference must be a string, got " + name.dump());
  auto id = dag.find(name.get<std::string>());
  if (!id) throw ConfigError("dag: unknown unit '" + name.get<std::string>() + "'");
  return *id;
}

std::string edge_label(const Dag& dag, EdgeId e) {
  return dag.name(dag.edges()[e].from) + "->" + dag.name(dag.edges()[e].to);
}

}  // namespace

Dag dag_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("dag: expected an object");
  Dag dag;
  std::set<std::string> names;
  std::vector<std::pair<UnitId, json>> group_specs;

  for (const auto& u : doc.at("units")) {
    const std::string id = u.at("id").get<std::string>();
    const std::string kind = u.at("kind").get<std::string>();
    if (!names.insert(id).second) throw ConfigError("dag: duplicate unit id '" + id + "'");
    auto type = unit_type_from_string(kind);
    if (!type) {
      if (kind == "leaky_rectifier" || kind == "sigmoid" || kind == "tanh") {
        throw ConfigError("dag: unit '" + id + "' uses unsupported activation '" + kind +
                          "'; only piecewise-linear gated units are allowed");
      }
      throw ConfigError("dag: unit '" + id + "' has unknown kind '" + kind + "'");
    }
    UnitKind k{*type, 1};
    if (*type == UnitType::Maxout) k.arity = u.at("k").get<int>();
    if (k.is_shared_group()) {
      const auto& copies = u.at("copies");
      k.arity = static_cast<int>(copies.size());
      if (u.contains("copies_count") && u.at("copies_count").get<int>() != k.arity) {
        throw ConfigError("dag: group '" + id + "' copies_count disagrees with copies");
      }
    }
    const UnitId uid = dag.add_unit(id, k);
    if (k.is_shared_group()) group_specs.emplace_back(uid, u.at("copies"));
  }

  std::set<std::pair<UnitId, UnitId>> listed;
  for (const auto& e : doc.value("edges", json::array())) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("dag: edge must be a [from, to] pair");
    const UnitId from = lookup(dag, e[0]);
    const UnitId to = lookup(dag, e[1]);
    dag.add_edge(from, to);
    listed.insert({from, to});
  }

  for (auto& [gid, copies_doc] : group_specs) {
    std::vector<std::vector<UnitId>> copies;
    for (const auto& tuple : copies_doc) {
      std::vector<UnitId> ids;
      for (const auto& name : tuple) ids.push_back(lookup(dag, name));
      copies.push_back(std::move(ids));
    }
    for (const auto& tuple : copies) {
      for (UnitId from : tuple) {
        if (listed.insert({from, gid}).second) dag.add_edge(from, gid);
      }
    }
    dag.set_group_copies(gid, std::move(copies));
  }

  for (const auto& o : doc.at("outputs")) dag.add_output(lookup(dag, o));

  const auto report = validate_dag(dag);
  if (!report.ok()) {
    std::string msg = "dag: invalid network:";
    for (const auto& v : report.violations) msg += " [" + v.kind + ": " + v.detail + "]";
    throw ConfigError(msg);
  }
  return dag;
}

json dag_to_json(const Dag& dag) {
  json units = json::array();
  for (UnitId u = 0; u < dag.size(); ++u) {
    const auto& kind = dag.kind(u);
    json unit = {{"id", dag.name(u)}, {"kind", to_string(kind.type)}};
    if (kind.type == UnitType::Maxout) unit["k"] = kind.arity;
    if (kind.is_shared_group()) {
      json copies = json::array();
      for (const auto& tuple : dag.group_copies(u)) {
        json t = json::array();
        for (UnitId i : tuple) t.push_back(dag.name(i));
        copies.push_back(std::move(t));
      }
      unit["copies"] = std::move(copies);
    }
    units.push_back(std::move(unit));
  }
  json edges = json::array();
  for (const auto& e : dag.edges()) edges.push_back({dag.name(e.from), dag.name(e.to)});
  json outputs = json::array();
  for (UnitId o : dag.outputs()) outputs.push_back(dag.name(o));
  return {{"units", units}, {"edges", edges}, {"outputs", outputs}};
}

GateSpec gate_from_json(const json& doc, const Dag& dag) {
  GateSpec gate;
  if (doc.is_null()) return gate;
  gate.seed = doc.value("seed", std::uint64_t{0});
  auto check = [](double p, const std::string& what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("gate: " + what + " probability must lie in [0,1]");
    return p;
  };
  if (doc.contains("dropout")) {
    const auto& d = doc.at("dropout");
    gate.dropout.assign(dag.size(), 0.0);
    if (d.is_number()) {
      const double p = check(d.get<double>(), "dropout");
      for (UnitId u = 0; u < dag.size(); ++u) {
        if (!dag.kind(u).is_source()) gate.dropout[u] = p;
      }
    } else {
      for (const auto& [name, p] : d.items()) gate.dropout[lookup(dag, name)] = check(p.get<double>(), "dropout");
    }
  }
  if (doc.contains("dropconnect")) {
    const auto& d = doc.at("dropconnect");
    gate.dropconnect.assign(dag.edges().size(), 0.0);
    if (d.is_number()) {
      gate.dropconnect.assign(dag.edges().size(), check(d.get<double>(), "dropconnect"));
    } else {
      for (const auto& [label, p] : d.items()) {
        bool found = false;
        for (EdgeId e = 0; e < dag.edges().size(); ++e) {
          if (edge_label(dag, e) == label) {
            gate.dropconnect[e] = check(p.get<double>(), "dropconnect");
            found = true;
          }
        }
        if (!found) throw ConfigError("gate: unknown edge '" + label + "'");
      }
    }
  }
  return gate;
}

json gate_to_json(const GateSpec& gate, const Dag& dag) {
  json doc = {{"seed", gate.seed}};
  json drop = json::object();
  for (UnitId u = 0; u < gate.dropout.size(); ++u) {
    if (gate.dropout[u] > 0.0) drop[dag.name(u)] = gate.dropout[u];
  }
  json conn = json::object();
  for (EdgeId e = 0; e < gate.dropconnect.size(); ++e) {
    if (gate.dropconnect[e] > 0.0) conn[edge_label(dag, e)] = gate.dropconnect[e];
  }
  doc["dropout"] = std::move(drop);
  doc["dropconnect"] = std::move(conn);
  return doc;
}

namespace {

json bits(const std::vector<bool>& v) {
  std::string s(v.size(), '0');
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] ? '1' : '0';
  return s;
}

std::vector<bool> unbits(const json& doc) {
  const auto s = doc.get<std::string>();
  std::vector<bool> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = s[i] == '1';
  return v;
}

}  // namespace

json active_set_to_json(const ActiveSet& a) {
  json groups = json::array();
  for (const auto& g : a.group_active) groups.push_back(bits(g));
  return {{"units", bits(a.unit_active)}, {"maxout", a.maxout_winner}, {"pool", a.pool_winner},
          {"groups", groups},             {"keep", bits(a.dropout_keep)}, {"edges", bits(a.edge_keep)}};
}

ActiveSet active_set_from_json(const json& doc) {
  ActiveSet a;
  a.unit_active = unbits(doc.at("units"));
  a.maxout_winner = doc.at("maxout").get<std::vector<int>>();
  a.pool_winner = doc.at("pool").get<std::vector<long>>();
  for (const auto& g : doc.at("groups")) a.group_active.push_back(unbits(g));
  a.dropout_keep = unbits(doc.at("keep"));
  a.edge_keep = unbits(doc.at("edges"));
  return a;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& doc) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) v[static_cast<Eigen::Index>(i)] = doc[i].get<double>();
  return v;
}

}  // namespace gated
