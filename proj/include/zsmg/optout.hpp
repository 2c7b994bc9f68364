#pragma once

#include <utility>
#include <variant>

#include "zsmg/linapprox.hpp"

namespace zsmg {

/// Single-agent optimal stopping: continue on the chain or take the
/// state-dependent exit reward.
struct StoppingProblem {
  MarkovChain chain;
  Vector stop_reward;
};

/// Two-player opt-out game: joint exit actions terminate with probability
/// terminate_prob(s,a,o) for reward exit_reward(s,a,o). Entries for (s,a,o)
/// live at flat index (s * n_agent_exits + a) * n_opp_exits + o.
struct OptOutGame {
  MarkovChain chain;
  int n_agent_exits = 0;
  int n_opp_exits = 0;
  std::vector<double> terminate_prob;
  std::vector<double> exit_reward;

  int idx(int s, int a, int o) const {
    return (s * n_agent_exits + a) * n_opp_exits + o;
  }
  void validate() const;
};

/// Continuation backup R_c + gamma P v.
Vector apply_continue(const MarkovChain& chain, const Vector& v);

/// Pointwise max(v, stop_reward).
Vector apply_stop(const StoppingProblem& problem, const Vector& v);

/// Per-state maximin of M[a,o] = P_h R_h + (1 - P_h) v(s).
Vector apply_optout(const OptOutGame& game, const Vector& v);

struct ProjectedIterationResult {
  WeightVector weights;
  std::vector<double> residuals;  // rho-norm step sizes per iteration
};

/// Iterates V <- Proj_rho T_h T_c V within the span of phi.
ProjectedIterationResult projected_value_iteration(
    const StoppingProblem& problem, const Matrix& phi, const Vector& rho,
    double tol = 1e-10, int max_iter = 100000);
ProjectedIterationResult projected_value_iteration(
    const OptOutGame& game, const Matrix& phi, const Vector& rho,
    double tol = 1e-10, int max_iter = 100000);

/// Returns (sup gap of the operator outputs, sup gap of the inputs) and
/// asserts the first does not exceed the second.
std::pair<double, double> check_pointwise_nonexpansion(const OptOutGame& game,
                                                       const Vector& v1,
                                                       const Vector& v2);

}  // namespace zsmg
