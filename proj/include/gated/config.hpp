#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gated/dag.hpp"
#include "gated/learners.hpp"
#include "gated/loss.hpp"
#include "gated/net_json.hpp"
#include "gated/network.hpp"

namespace gated {

inline constexpr int kSchemaVersion = 1;

struct LearnerSpec {
  LearnerKind kind = LearnerKind::Ogd;
  Bounds bounds;
  double eta = 0.0;                      // gd only
  std::string center_mode = "origin";    // "origin", "init" or "explicit"
  Eigen::VectorXd center;                // when explicit
};

struct DatasetSpec {
  std::string kind = "linear";  // "teacher", "linear" or "replay"
  int inputs = 2;               // excluding the bias input
  int outputs = 1;
  bool bias = false;            // append a constant 1 input
  double noise = 0.0;           // uniform on [−noise, noise], added to labels
  double scale = 1.0;           // teacher / linear weight range
  int hidden = 4;               // rectifiers of the default teacher
  json teacher_dag;             // optional explicit teacher net
  std::string labels = "real";  // "real" or "sign"
  std::string path;             // replay file
  std::optional<std::uint64_t> seed;
};

struct CogSpec {
  std::string unit;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  double norm_max = 1.0;  // upper end of the input-norm buckets
};

struct Tolerances {
  double identity = 1e-9;       // ε-CCE vs regret, replay consistency
  double gain_identity = 1e-8;  // gain-gradient identities
  double jitter = 0.05;         // allowed rise of max ε between checkpoints
  double bound_slack = 0.0;     // added to every regret bound
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  json dag_doc;
  Dag dag;
  GateSpec gate;
  LossFn loss;
  LearnerSpec learner;                          // default for every player
  std::map<std::string, LearnerSpec> overrides; // keyed by player name
  double init_scale = 0.5;
  DatasetSpec dataset;
  long rounds = 1;
  std::uint64_t seed = 0;
  int minibatch = 1;
  std::string output;
  Tolerances tolerances;
  std::vector<long> checkpoints = {100, 1000, 10000};
  std::string cce_mode = "grad";                // game used for the checkpoint sequence
  std::optional<CogSpec> cog;
  json raw;                                     // the document as loaded

  const LearnerSpec& learner_for(const std::string& player) const;
};

/// Throws ConfigError with the offending field named.
ExperimentConfig config_from_json(const json& doc);
ExperimentConfig load_config(const std::string& path);
json load_json_file(const std::string& path);

}  // namespace gated
