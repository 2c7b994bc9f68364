#include "zsmg/game.hpp"

#include <cmath>

namespace zsmg {

std::size_t TabularGame::live_table_size() const {
  std::size_t live = 0;
  for (int s = 0; s < n_states; ++s)
    if (!is_terminal(s)) ++live;
  return live * n_agent_actions * n_opp_actions;
}

void TabularGame::validate() const {
  if (n_states < 1 || n_agent_actions < 1 || n_opp_actions < 1)
    throw GameError("TabularGame: empty dimension");
  if (!(discount > 0.0 && discount <= 1.0))
    throw GameError("TabularGame: discount must lie in (0, 1]");
  if (transitions.size() != table_size() || rewards.size() != table_size())
    throw GameError("TabularGame: table size mismatch");
  if (terminal.size() != static_cast<std::size_t>(n_states))
    throw GameError("TabularGame: terminal mask size mismatch");

  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_agent_actions; ++a) {
      for (int o = 0; o < n_opp_actions; ++o) {
        const auto& row = transitions[idx(s, a, o)];
        if (is_terminal(s)) {
          if (!row.empty())
            throw GameError("TabularGame: terminal state " + std::to_string(s) +
                            " has outgoing transitions");
          continue;
        }
        double total = 0.0;
        for (const auto& t : row) {
          if (t.state < 0 || t.state >= n_states)
            throw GameError("TabularGame: successor out of range at state " +
                            std::to_string(s));
          if (t.prob < 0.0)
            throw GameError("TabularGame: negative probability at state " +
                            std::to_string(s));
          total += t.prob;
        }
        if (std::abs(total - 1.0) > 1e-12)
          throw GameError("TabularGame: row (" + std::to_string(s) + "," +
                          std::to_string(a) + "," + std::to_string(o) +
                          ") sums to " + std::to_string(total));
        if (!std::isfinite(rewards[idx(s, a, o)]))
          throw GameError("TabularGame: non-finite reward at state " +
                          std::to_string(s));
      }
    }
  }
}

double sup_distance(const QTable& a, const QTable& b) {
  if (a.values.size() != b.values.size())
    throw GameError("sup_distance: shape mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

}  // namespace zsmg
