#include "zsmg/dp.hpp"

#include <cmath>
#include <limits>

namespace zsmg {

namespace {

Matrix q_slice(const QTable& q, int s) {
  Matrix m(q.n_agent_actions, q.n_opp_actions);
  for (int a = 0; a < q.n_agent_actions; ++a)
    for (int o = 0; o < q.n_opp_actions; ++o) m(a, o) = q.at(s, a, o);
  return m;
}

void check_shapes(const TabularGame& game, const QTable& q) {
  if (q.n_states != game.n_states || q.n_agent_actions != game.n_agent_actions ||
      q.n_opp_actions != game.n_opp_actions)
    throw GameError("Q table shape does not match game");
}

}  // namespace

std::vector<double> minimax_state_values(const TabularGame& game,
                                         const QTable& q) {
  check_shapes(game, q);
  std::vector<double> v(game.n_states, 0.0);
  for (int s = 0; s < game.n_states; ++s) {
    if (game.is_terminal(s)) continue;
    try {
      v[s] = solve_maximin(q_slice(q, s)).value;
    } catch (const LpError& e) {
      throw LpError(std::string(e.what()) + " (state " + std::to_string(s) +
                    ")");
    }
  }
  return v;
}

QTable apply_t_star(const TabularGame& game, const QTable& q) {
  const std::vector<double> v = minimax_state_values(game, q);
  QTable out = QTable::zeros(game);
  for (int s = 0; s < game.n_states; ++s) {
    for (int a = 0; a < game.n_agent_actions; ++a) {
      for (int o = 0; o < game.n_opp_actions; ++o) {
        const int i = game.idx(s, a, o);
        double backup = game.rewards[i];
        for (const auto& t : game.transitions[i])
          backup += game.discount * t.prob * v[t.state];
        out.values[i] = backup;
      }
    }
  }
  return out;
}

QTable apply_t_pi(const TabularGame& game, const QTable& q,
                  const PolicyTable& pi) {
  check_shapes(game, q);
  if (pi.n_states != game.n_states || pi.n_actions != game.n_agent_actions)
    throw GameError("policy shape does not match game");

  // V_pi(s) = min_o' sum_a' Q(s,a',o') pi(s,a').
  std::vector<double> v(game.n_states, 0.0);
  for (int s = 0; s < game.n_states; ++s) {
    if (game.is_terminal(s)) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (int o = 0; o < game.n_opp_actions; ++o) {
      double ev = 0.0;
      for (int a = 0; a < game.n_agent_actions; ++a)
        ev += q.at(s, a, o) * pi.at(s, a);
      worst = std::min(worst, ev);
    }
    v[s] = worst;
  }

  QTable out = QTable::zeros(game);
  for (int s = 0; s < game.n_states; ++s) {
    for (int a = 0; a < game.n_agent_actions; ++a) {
      for (int o = 0; o < game.n_opp_actions; ++o) {
        const int i = game.idx(s, a, o);
        double backup = game.rewards[i];
        for (const auto& t : game.transitions[i])
          backup += game.discount * t.prob * v[t.state];
        out.values[i] = backup;
      }
    }
  }
  return out;
}

ValueIterationResult value_iteration(const TabularGame& game, double tol,
                                     int max_iter) {
  if (game.discount >= 1.0)
    throw GameError("value_iteration requires discount < 1");
  QTable q = QTable::zeros(game);
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= max_iter; ++iter) {
    QTable next = apply_t_star(game, q);
    residual = sup_distance(next, q);
    q = std::move(next);
    if (residual < tol) return {std::move(q), iter, residual};
  }
  throw ConvergenceError("value_iteration: no convergence after " +
                             std::to_string(max_iter) +
                             " sweeps, residual = " + std::to_string(residual),
                         residual);
}

QTable policy_evaluation(const TabularGame& game, const PolicyTable& pi,
                         double tol, int max_iter) {
  QTable q = QTable::zeros(game);
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= max_iter; ++iter) {
    QTable next = apply_t_pi(game, q, pi);
    residual = sup_distance(next, q);
    q = std::move(next);
    if (residual < tol) return q;
  }
  throw ConvergenceError("policy_evaluation: no convergence, residual = " +
                             std::to_string(residual),
                         residual);
}

PolicyTable minimax_greedy_policy(const TabularGame& game, const QTable& q) {
  check_shapes(game, q);
  PolicyTable pi = PolicyTable::uniform(game.n_states, game.n_agent_actions);
  for (int s = 0; s < game.n_states; ++s) {
    if (game.is_terminal(s)) continue;
    MaximinSolution sol;
    try {
      sol = solve_maximin(q_slice(q, s));
    } catch (const LpError& e) {
      throw LpError(std::string(e.what()) + " (state " + std::to_string(s) +
                    ")");
    }
    for (int a = 0; a < game.n_agent_actions; ++a)
      pi.at(s, a) = sol.strategy[a];
  }
  return pi;
}

PolicyIterationResult policy_iteration(const TabularGame& game, double tol,
                                       int max_outer) {
  if (game.discount >= 1.0)
    throw GameError("policy_iteration requires discount < 1");
  PolicyTable pi = minimax_greedy_policy(game, QTable::zeros(game));
  QTable q = policy_evaluation(game, pi);
  for (int outer = 1; outer <= max_outer; ++outer) {
    PolicyTable next_pi = minimax_greedy_policy(game, q);
    QTable next_q = policy_evaluation(game, next_pi);
    const double delta = sup_distance(next_q, q);
    pi = std::move(next_pi);
    q = std::move(next_q);
    if (delta < tol) return {std::move(q), std::move(pi), outer};
  }
  throw ConvergenceError("policy_iteration: no convergence after " +
                             std::to_string(max_outer) + " outer iterations",
                         0.0);
}

double bellman_residual(const TabularGame& game, const QTable& q) {
  return sup_distance(apply_t_star(game, q), q);
}

double bound_fixed_point_distance(double residual, double rate) {
  if (rate < 0.0 || rate >= 1.0)
    throw GameError("bound_fixed_point_distance: rate must lie in [0, 1)");
  return residual / (1.0 - rate);
}

double bound_policy_loss(double residual, double discount) {
  if (discount < 0.0 || discount >= 1.0)
    throw GameError("bound_policy_loss: discount must lie in [0, 1)");
  return 2.0 * residual / (1.0 - discount);
}

}  // namespace zsmg
