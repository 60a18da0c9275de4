#include "gated/config.hpp"

#include <fstream>

#include "gated/errors.hpp"

namespace gated {

const LearnerSpec& ExperimentConfig::learner_for(const std::string& player) const {
  auto it = overrides.find(player);
  return it == overrides.end() ? learner : it->second;
}

namespace {

Bounds bounds_from_json(const json& doc, Bounds b) {
  b.D = doc.value("D", b.D);
  b.B = doc.value("B", b.B);
  b.G = doc.value("G", b.G);
  b.alpha = doc.value("alpha", b.alpha);
  if (!(b.D > 0 && b.B > 0 && b.G > 0 && b.alpha > 0)) throw ConfigError("learner: bounds must be positive");
  return b;
}

LearnerSpec learner_from_json(const json& doc, LearnerSpec spec) {
  if (doc.contains("kind")) spec.kind = learner_kind_from_string(doc.at("kind").get<std::string>());
  if (doc.contains("bounds")) spec.bounds = bounds_from_json(doc.at("bounds"), spec.bounds);
  spec.eta = doc.value("eta", spec.eta);
  if (doc.contains("center")) {
    const auto& c = doc.at("center");
    if (c.is_string()) {
      spec.center_mode = c.get<std::string>();
      if (spec.center_mode != "origin" && spec.center_mode != "init") {
        throw ConfigError("learner: center must be \"origin\", \"init\" or an array");
      }
    } else {
      spec.center_mode = "explicit";
      spec.center = vector_from_json(c);
    }
  }
  if (spec.kind == LearnerKind::Gd && !(spec.eta > 0.0)) throw ConfigError("learner: gd requires eta > 0");
  return spec;
}

DatasetSpec dataset_from_json(const json& doc) {
  DatasetSpec d;
  d.kind = doc.value("kind", d.kind);
  if (d.kind != "teacher" && d.kind != "linear" && d.kind != "replay") {
    throw ConfigError("dataset: unknown kind '" + d.kind + "'");
  }
  d.inputs = doc.value("inputs", d.inputs);
  d.outputs = doc.value("outputs", d.outputs);
  d.bias = doc.value("bias", d.bias);
  d.noise = doc.value("noise", d.noise);
  d.scale = doc.value("scale", d.scale);
  d.hidden = doc.value("hidden", d.hidden);
  d.labels = doc.value("labels", d.labels);
  d.path = doc.value("path", d.path);
  if (doc.contains("teacher")) d.teacher_dag = doc.at("teacher");
  if (doc.contains("seed")) d.seed = doc.at("seed").get<std::uint64_t>();
  if (d.inputs < 1 || d.outputs < 1) throw ConfigError("dataset: inputs and outputs must be positive");
  if (d.noise < 0.0) throw ConfigError("dataset: noise must be non-negative");
  if (d.labels != "real" && d.labels != "sign") throw ConfigError("dataset: labels must be \"real\" or \"sign\"");
  if (d.kind == "replay" && d.path.empty()) throw ConfigError("dataset: replay needs a path");
  return d;
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  try {
    c.raw = doc;
    c.schema_version = doc.value("schema_version", kSchemaVersion);
    if (c.schema_version != kSchemaVersion) {
      throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));
    }
    c.dag_doc = doc.at("dag");
    c.dag = dag_from_json(c.dag_doc);
    c.gate = gate_from_json(doc.value("gate", json()), c.dag);
    if (doc.contains("loss")) {
      const auto& l = doc.at("loss");
      c.loss.kind = loss_kind_from_string(l.value("kind", std::string("mse")));
      c.loss.alpha = l.value("alpha", c.loss.alpha);
      if (!(c.loss.alpha > 0.0)) throw ConfigError("loss: alpha must be positive");
    }
    if (doc.contains("learner")) {
      const auto& l = doc.at("learner");
      c.learner = learner_from_json(l, c.learner);
      c.learner.bounds.alpha = l.contains("bounds") && l.at("bounds").contains("alpha") ? c.learner.bounds.alpha
                                                                                           : c.loss.alpha;
      const json overrides = l.value("overrides", json::object());
      for (const auto& [name, o] : overrides.items()) {
        bool known = false;
        for (const auto& p : c.dag.players()) known = known || c.dag.player_name(p) == name;
        if (!known) throw ConfigError("learner: override for unknown player '" + name + "'");
        c.overrides[name] = learner_from_json(o, c.learner);
      }
    } else {
      c.learner.bounds.alpha = c.loss.alpha;
    }
    c.init_scale = doc.value("init_scale", c.init_scale);
    if (doc.contains("dataset")) c.dataset = dataset_from_json(doc.at("dataset"));
    c.rounds = doc.value("rounds", c.rounds);
    c.seed = doc.value("seed", c.seed);
    c.minibatch = doc.value("minibatch", c.minibatch);
    c.output = doc.value("output", c.output);
    if (doc.contains("tolerances")) {
      const auto& t = doc.at("tolerances");
      c.tolerances.identity = t.value("identity", c.tolerances.identity);
      c.tolerances.gain_identity = t.value("gain_identity", c.tolerances.gain_identity);
      c.tolerances.jitter = t.value("jitter", c.tolerances.jitter);
      c.tolerances.bound_slack = t.value("bound_slack", c.tolerances.bound_slack);
    }
    if (doc.contains("checkpoints")) c.checkpoints = doc.at("checkpoints").get<std::vector<long>>();
    c.cce_mode = doc.value("cce_mode", c.cce_mode);
    if (c.cce_mode != "grad" && c.cce_mode != "pred") throw ConfigError("config: cce_mode must be grad or pred");
    if (doc.contains("cog")) {
      const auto& g = doc.at("cog");
      CogSpec s;
      s.unit = g.at("unit").get<std::string>();
      s.epsilon = g.value("epsilon", s.epsilon);
      s.seed = g.value("seed", s.seed);
      s.norm_max = g.value("norm_max", s.norm_max);
      const auto id = c.dag.find(s.unit);
      if (!id) throw ConfigError("cog: unknown unit '" + s.unit + "'");
      const auto type = c.dag.kind(*id).type;
      if (type != UnitType::Maxout && type != UnitType::Rectifier) {
        throw ConfigError("cog: unit '" + s.unit + "' must be a maxout or rectifier unit");
      }
      if (!(s.epsilon >= 0.0 && s.epsilon <= 1.0)) throw ConfigError("cog: epsilon must lie in [0,1]");
      c.cog = s;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.rounds < 1) throw ConfigError("config: rounds must be at least 1");
  if (c.minibatch < 1) throw ConfigError("config: minibatch must be at least 1");
  const int inputs = c.dataset.inputs + (c.dataset.bias ? 1 : 0);
  if (static_cast<std::size_t>(inputs) != c.dag.sources().size()) {
    throw ConfigError("config: dataset provides " + std::to_string(inputs) + " inputs but the dag has " +
                      std::to_string(c.dag.sources().size()) + " sources");
  }
  if (static_cast<std::size_t>(c.dataset.outputs) != c.dag.outputs().size()) {
    throw ConfigError("config: dataset provides " + std::to_string(c.dataset.outputs) +
                      " labels per sample but the dag has " + std::to_string(c.dag.outputs().size()) + " outputs");
  }
  for (const auto& p : c.dag.players()) {
    const auto& spec = c.learner_for(c.dag.player_name(p));
    if (spec.center_mode == "explicit" && static_cast<std::size_t>(spec.center.size()) != c.dag.indegree(p.unit)) {
      throw ConfigError("learner: center of '" + c.dag.player_name(p) + "' has the wrong dimension");
    }
  }
  return c;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(load_json_file(path)); }

}  // namespace gated
