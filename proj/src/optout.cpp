#include "zsmg/optout.hpp"

#include <cmath>

namespace zsmg {

void OptOutGame::validate() const {
  chain.validate();
  if (n_agent_exits < 1 || n_opp_exits < 1)
    throw NumericError("OptOutGame: empty exit action sets");
  const std::size_t n =
      static_cast<std::size_t>(chain.n_states) * n_agent_exits * n_opp_exits;
  if (terminate_prob.size() != n || exit_reward.size() != n)
    throw NumericError("OptOutGame: table size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (terminate_prob[i] < 0.0 || terminate_prob[i] > 1.0)
      throw NumericError("OptOutGame: terminate probability outside [0, 1]");
    if (!std::isfinite(exit_reward[i]))
      throw NumericError("OptOutGame: non-finite exit reward");
  }
}

Vector apply_continue(const MarkovChain& chain, const Vector& v) {
  if (v.size() != chain.n_states)
    throw NumericError("apply_continue: size mismatch");
  Vector out = chain.reward;
  for (int s = 0; s < chain.n_states; ++s)
    for (const auto& t : chain.rows[s])
      out[s] += chain.discount * t.prob * v[t.state];
  return out;
}

Vector apply_stop(const StoppingProblem& problem, const Vector& v) {
  if (v.size() != problem.stop_reward.size())
    throw NumericError("apply_stop: size mismatch");
  return v.cwiseMax(problem.stop_reward);
}

Vector apply_optout(const OptOutGame& game, const Vector& v) {
  if (v.size() != game.chain.n_states)
    throw NumericError("apply_optout: size mismatch");
  Vector out(game.chain.n_states);
  Matrix m(game.n_agent_exits, game.n_opp_exits);
  for (int s = 0; s < game.chain.n_states; ++s) {
    for (int a = 0; a < game.n_agent_exits; ++a) {
      for (int o = 0; o < game.n_opp_exits; ++o) {
        const int i = game.idx(s, a, o);
        m(a, o) = game.terminate_prob[i] * game.exit_reward[i] +
                  (1.0 - game.terminate_prob[i]) * v[s];
      }
    }
    try {
      out[s] = solve_maximin(m).value;
    } catch (const LpError& e) {
      throw LpError(std::string(e.what()) + " (state " + std::to_string(s) +
                    ")");
    }
  }
  return out;
}

namespace {

template <typename StopOp>
ProjectedIterationResult projected_iterate(const MarkovChain& chain,
                                           StopOp&& stop_op, const Matrix& phi,
                                           const Vector& rho, double tol,
                                           int max_iter) {
  if (phi.rows() != chain.n_states)
    throw NumericError("projected_value_iteration: basis row count mismatch");
  ProjectedIterationResult result;
  Vector w = Vector::Zero(phi.cols());
  Vector v = phi * w;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vector backed = stop_op(apply_continue(chain, v));
    const Vector next_w = project_weighted(phi, rho, backed);
    const Vector next_v = phi * next_w;
    const double step = weighted_norm(next_v - v, rho);
    result.residuals.push_back(step);
    w = next_w;
    v = next_v;
    if (step < tol) {
      result.weights.w = w;
      result.weights.gamma = chain.discount;
      return result;
    }
  }
  throw NumericError(
      "projected_value_iteration: no convergence (is rho stationary for the "
      "chain?)");
}

}  // namespace

ProjectedIterationResult projected_value_iteration(
    const StoppingProblem& problem, const Matrix& phi, const Vector& rho,
    double tol, int max_iter) {
  return projected_iterate(
      problem.chain, [&](const Vector& v) { return apply_stop(problem, v); },
      phi, rho, tol, max_iter);
}

ProjectedIterationResult projected_value_iteration(const OptOutGame& game,
                                                   const Matrix& phi,
                                                   const Vector& rho,
                                                   double tol, int max_iter) {
  return projected_iterate(
      game.chain, [&](const Vector& v) { return apply_optout(game, v); }, phi,
      rho, tol, max_iter);
}

std::pair<double, double> check_pointwise_nonexpansion(const OptOutGame& game,
                                                       const Vector& v1,
                                                       const Vector& v2) {
  const Vector out1 = apply_optout(game, v1);
  const Vector out2 = apply_optout(game, v2);
  const double out_gap = (out1 - out2).cwiseAbs().maxCoeff();
  const double in_gap = (v1 - v2).cwiseAbs().maxCoeff();
  if (out_gap > in_gap + 1e-9)
    throw NumericError("opt-out operator expanded: output gap " +
                       std::to_string(out_gap) + " > input gap " +
                       std::to_string(in_gap));
  return {out_gap, in_gap};
}

}  // namespace zsmg
