#pragma once

#include <utility>

#include "zsmg/game.hpp"
#include "zsmg/matrix_lp.hpp"

namespace zsmg {

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

/// One sweep of the optimality operator: per (s,a,o),
/// R + gamma * sum_s' P(s,a,o,s') * maximin(Q(s',.,.)).
/// One LP per non-terminal successor state, memoized within the sweep.
QTable apply_t_star(const TabularGame& game, const QTable& q);

/// One sweep of the fixed-policy operator: the successor value is
/// min_o' sum_a' Q(s',a',o') pi(s',a') — no LP needed.
QTable apply_t_pi(const TabularGame& game, const QTable& q,
                  const PolicyTable& pi);

struct ValueIterationResult {
  QTable q;
  int iterations = 0;
  double residual = 0.0;
};

ValueIterationResult value_iteration(const TabularGame& game, double tol,
                                     int max_iter);

QTable policy_evaluation(const TabularGame& game, const PolicyTable& pi,
                         double tol = 1e-9, int max_iter = 100000);

struct PolicyIterationResult {
  QTable q;
  PolicyTable policy;
  int outer_iterations = 0;
};

/// Evaluate, improve with the minimax-greedy policy, repeat until the
/// evaluated Q moves by less than tol in sup norm.
PolicyIterationResult policy_iteration(const TabularGame& game,
                                       double tol = 1e-6, int max_outer = 1000);

/// Per-state maximin mixed strategy over the Q(s,.,.) slices.
PolicyTable minimax_greedy_policy(const TabularGame& game, const QTable& q);

/// epsilon_T*(Q) = ||T*Q - Q||_inf.
double bellman_residual(const TabularGame& game, const QTable& q);

/// Contraction fixed-point distance bound: residual / (1 - rate).
double bound_fixed_point_distance(double residual, double rate);

/// Greedy-policy loss bound: 2 * residual / (1 - discount).
double bound_policy_loss(double residual, double discount);

/// Per-state maximin values of Q (zero at terminal states).
std::vector<double> minimax_state_values(const TabularGame& game,
                                         const QTable& q);

}  // namespace zsmg
