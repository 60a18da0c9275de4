#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gated/config.hpp"

namespace gated {

struct Example {
  Eigen::VectorXd x;  // includes the bias entry when configured
  Eigen::VectorXd y;
};

/// Teacher net used by teacher-mode datasets: the explicit net when one is
/// given, otherwise one hidden layer of rectifiers with linear outputs.
struct Teacher {
  Dag dag;
  WeightState weights;
};

Teacher make_teacher(const DatasetSpec& spec, std::uint64_t seed);

/// Labels of one input under the teacher, with deterministic gating.
Eigen::VectorXd teacher_label(const Teacher& teacher, const Eigen::VectorXd& x);

/// `count` examples, deterministic in (spec, seed). Replay files are cycled
/// when shorter than `count`.
std::vector<Example> generate_dataset(const DatasetSpec& spec, long count, std::uint64_t seed);

/// CSV with header x0..x{d-1},y0..y{k-1}.
void write_dataset_csv(std::ostream& out, const std::vector<Example>& data);
std::vector<Example> read_dataset_csv(const std::string& path, int inputs, int outputs);

}  // namespace gated
