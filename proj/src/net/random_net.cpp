#include "gated/random_net.hpp"

#include <algorithm>
#include <numeric>

namespace gated {

namespace {

int draw(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

double symmetric(Rng& rng, double scale) { return scale * (2.0 * uniform01(rng) - 1.0); }

std::vector<UnitId> pick_distinct(Rng& rng, UnitId limit, int count) {
  std::vector<UnitId> pool(limit);
  std::iota(pool.begin(), pool.end(), UnitId{0});
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i))]);
  }
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(count)));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

Dag random_dag(Rng& rng, const RandomNetOptions& opts) {
  Dag dag;
  const int sources = draw(rng, opts.min_sources, opts.max_sources);
  for (int s = 0; s < sources; ++s) dag.add_unit("x" + std::to_string(s), UnitKind::source());

  std::vector<UnitType> menu = {UnitType::Linear, UnitType::Rectifier, UnitType::Rectifier};
  if (opts.maxout) menu.push_back(UnitType::Maxout);
  if (opts.max_pool) menu.push_back(UnitType::MaxPool);
  if (opts.shared_groups) {
    menu.push_back(UnitType::SharedLinearGroup);
    menu.push_back(UnitType::SharedRectifierGroup);
  }

  const int hidden = draw(rng, opts.min_hidden, opts.max_hidden);
  for (int h = 0; h < hidden; ++h) {
    const UnitType type = menu[static_cast<std::size_t>(draw(rng, 0, static_cast<int>(menu.size()) - 1))];
    const UnitId limit = dag.size();
    UnitKind kind{type, 1};
    if (type == UnitType::Maxout) kind.arity = draw(rng, 2, 3);
    if (kind.is_shared_group()) kind.arity = draw(rng, 1, 3);
    const UnitId u = dag.add_unit("h" + std::to_string(h), kind);

    if (kind.is_shared_group()) {
      const int width = draw(rng, 1, 2);
      std::vector<std::vector<UnitId>> copies;
      std::vector<UnitId> used;
      for (int c = 0; c < kind.arity; ++c) {
        std::vector<UnitId> tuple;
        for (int p = 0; p < width; ++p) {
          tuple.push_back(static_cast<UnitId>(draw(rng, 0, static_cast<int>(limit) - 1)));
        }
        for (UnitId i : tuple) {
          if (std::find(used.begin(), used.end(), i) == used.end()) used.push_back(i);
        }
        copies.push_back(std::move(tuple));
      }
      for (UnitId i : used) dag.add_edge(i, u);
      dag.set_group_copies(u, std::move(copies));
    } else {
      const int fan_in = draw(rng, 1, std::min<int>(opts.max_fan_in, static_cast<int>(limit)));
      for (UnitId i : pick_distinct(rng, limit, fan_in)) dag.add_edge(i, u);
    }
  }

  // The last unit is always an output; a second output is drawn among the
  // remaining non-source units.
  const UnitId last = dag.size() - 1;
  dag.add_output(last);
  if (opts.max_outputs > 1 && hidden > 1 && uniform01(rng) < 0.5) {
    const UnitId other = static_cast<UnitId>(draw(rng, sources, static_cast<int>(last) - 1));
    dag.add_output(other);
  }
  return dag;
}

WeightState random_weights(const Dag& dag, Rng& rng, double scale) {
  WeightState w = WeightState::zeros(dag);
  for (auto& unit : w.w) {
    for (auto& v : unit) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = symmetric(rng, scale);
    }
  }
  for (Eigen::Index i = 0; i < w.input.size(); ++i) w.input[i] = symmetric(rng, 1.0);
  return w;
}

}  // namespace gated
