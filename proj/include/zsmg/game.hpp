#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsmg {

class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Transition {
  int state;
  double prob;
};

/// Explicit finite two-player zero-sum Markov game. Transition and reward
/// entries for (s,a,o) live at flat index (s * |A| + a) * |O| + o. Terminal
/// states carry no outgoing transitions; their future value is zero.
struct TabularGame {
  int n_states = 0;
  int n_agent_actions = 0;
  int n_opp_actions = 0;
  std::vector<std::vector<Transition>> transitions;
  std::vector<double> rewards;
  double discount = 0.0;
  std::vector<std::uint8_t> terminal;

  int idx(int s, int a, int o) const {
    return (s * n_agent_actions + a) * n_opp_actions + o;
  }
  bool is_terminal(int s) const { return terminal[s] != 0; }
  std::size_t table_size() const {
    return static_cast<std::size_t>(n_states) * n_agent_actions * n_opp_actions;
  }
  /// Entries in non-terminal rows; matches the per-state Q count reported
  /// for the exact soccer models.
  std::size_t live_table_size() const;

  /// Throws GameError if probability rows don't sum to 1 (1e-12), terminal
  /// states carry transitions, or discount is outside (0, 1].
  void validate() const;
};

struct QTable {
  int n_states = 0;
  int n_agent_actions = 0;
  int n_opp_actions = 0;
  std::vector<double> values;

  static QTable zeros(const TabularGame& g) {
    return {g.n_states, g.n_agent_actions, g.n_opp_actions,
            std::vector<double>(g.table_size(), 0.0)};
  }
  int idx(int s, int a, int o) const {
    return (s * n_agent_actions + a) * n_opp_actions + o;
  }
  double& at(int s, int a, int o) { return values[idx(s, a, o)]; }
  double at(int s, int a, int o) const { return values[idx(s, a, o)]; }
};

struct ValueTable {
  std::vector<double> values;
};

/// Per-state mixed strategy over agent actions; rows sum to 1 (1e-9).
struct PolicyTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> probs;

  static PolicyTable uniform(int n_states, int n_actions) {
    return {n_states, n_actions,
            std::vector<double>(static_cast<std::size_t>(n_states) * n_actions,
                                1.0 / n_actions)};
  }
  double at(int s, int a) const { return probs[s * n_actions + a]; }
  double& at(int s, int a) { return probs[s * n_actions + a]; }
};

double sup_distance(const QTable& a, const QTable& b);

}  // namespace zsmg
