#include "gated/oracle_check.hpp"

#include <cmath>
#include <ostream>

#include "gated/backprop.hpp"
#include "gated/pathsum.hpp"
#include "gated/random_net.hpp"

namespace gated {

bool OracleCheckReport::passed(double tol) const {
  return failures == 0 && max_output_gap < tol && max_decomposition < tol && max_delta_gap < tol &&
         max_grad_gap < tol && max_input_gap < tol;
}

void OracleCheckReport::print(std::ostream& out) const {
  out << "trials                 " << trials << '\n'
      << "max |output gap|       " << max_output_gap << '\n'
      << "max |decomposition|    " << max_decomposition << '\n'
      << "max |delta gap|        " << max_delta_gap << '\n'
      << "max |grad.w gap|       " << max_grad_gap << '\n'
      << "max |input gap|        " << max_input_gap << '\n'
      << "failing trials         " << failures << '\n';
}

OracleCheckReport oracle_check(const Dag& dag, const GateSpec& gate, long trials, std::uint64_t seed, double scale,
                               double tol) {
  OracleCheckReport rep;
  Rng rng(seed);
  for (long i = 0; i < trials; ++i) {
    const WeightState w = random_weights(dag, rng, scale);
    const ActiveSet active = compute_active_set(dag, w, gate, rng);
    const ForwardTrace trace = feedforward(dag, w, active);
    const PathOracle oracle(dag, w, active);

    Eigen::VectorXd g(trace.net_out.size());
    for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = 2.0 * uniform01(rng) - 1.0;
    const BackpropTrace bp = backprop(dag, w, active, trace, g);

    double worst = (trace.net_out - oracle.sigma_out()).cwiseAbs().maxCoeff();
    rep.max_output_gap = std::max(rep.max_output_gap, worst);
    for (UnitId j = 0; j < dag.size(); ++j) {
      const double dec = check_decomposition(oracle, active, j, trace.net_out).cwiseAbs().maxCoeff();
      rep.max_decomposition = std::max(rep.max_decomposition, dec);
      worst = std::max(worst, dec);
      if (!active.unit_active[j] || dag.kind(j).is_source()) continue;

      const double dgap = std::abs(bp.delta[j] - g.dot(oracle.sigma_to_out(j)));
      const double igap = (trace.in[j] - oracle.varsigma_in(j)).cwiseAbs().maxCoeff();
      rep.max_delta_gap = std::max(rep.max_delta_gap, dgap);
      rep.max_input_gap = std::max(rep.max_input_gap, igap);
      worst = std::max({worst, dgap, igap});
      const int players = dag.kind(j).players();
      if (players == 0) continue;
      const PlayerId id{j, std::max(active.maxout_winner[j], 0)};
      const double ggap = std::abs(bp.grad_of(id).dot(w.of(id)) - bp.delta[j] * oracle.sigma_source_to(j));
      rep.max_grad_gap = std::max(rep.max_grad_gap, ggap);
      worst = std::max(worst, ggap);
    }
    ++rep.trials;
    if (!(worst < tol)) ++rep.failures;
  }
  return rep;
}

}  // namespace gated
