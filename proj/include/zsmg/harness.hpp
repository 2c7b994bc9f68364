#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "zsmg/env.hpp"
#include "zsmg/game.hpp"
#include "zsmg/lspi.hpp"
#include "zsmg/soccer.hpp"

namespace zsmg {

/// A participant in tournaments: provides a mixed strategy for whichever
/// side it plays (agent A maximizes, player B minimizes).
class Player {
 public:
  virtual ~Player() = default;
  virtual std::string name() const = 0;
  /// Strategy when playing as the maximizing agent A.
  virtual Vector agent_strategy(long long state) const = 0;
  /// Strategy when playing as the minimizing player B.
  virtual Vector opponent_strategy(long long state) const = 0;
};

class RandomPlayer : public Player {
 public:
  RandomPlayer(int n_agent_actions, int n_opp_actions)
      : na_(n_agent_actions), no_(n_opp_actions) {}
  std::string name() const override { return "random"; }
  Vector agent_strategy(long long) const override {
    return Vector::Constant(na_, 1.0 / na_);
  }
  Vector opponent_strategy(long long) const override {
    return Vector::Constant(no_, 1.0 / no_);
  }

 private:
  int na_;
  int no_;
};

/// Minimax strategies read off a solved Q table. The B side comes from the
/// transposed, negated per-state matrix (zero-sum symmetry).
class ExactPlayer : public Player {
 public:
  explicit ExactPlayer(QTable q, std::string name = "exact");
  std::string name() const override { return name_; }
  Vector agent_strategy(long long state) const override;
  Vector opponent_strategy(long long state) const override;

 private:
  QTable q_;
  std::string name_;
  mutable std::unordered_map<long long, Vector> a_cache_;
  mutable std::unordered_map<long long, Vector> b_cache_;
  mutable std::mutex mutex_;
};

/// Minimax strategies over the approximate Q(s,a,o) = phi(s,a,o)^T w.
class WeightsPlayer : public Player {
 public:
  WeightsPlayer(WeightVector weights, std::shared_ptr<const FeatureMap> features,
                int n_agent_actions, int n_opp_actions,
                std::string name = "weights");
  std::string name() const override { return name_; }
  Vector agent_strategy(long long state) const override;
  Vector opponent_strategy(long long state) const override;

 private:
  Matrix value_matrix(long long state) const;
  WeightVector weights_;
  std::shared_ptr<const FeatureMap> features_;
  int na_;
  int no_;
  std::string name_;
  mutable std::unordered_map<long long, Vector> a_cache_;
  mutable std::unordered_map<long long, Vector> b_cache_;
  mutable std::mutex mutex_;
};

/// Externally supplied per-state strategy tables for both sides.
class FixedPlayer : public Player {
 public:
  FixedPlayer(PolicyTable agent_side, PolicyTable opponent_side,
              std::string name = "fixed");
  std::string name() const override { return name_; }
  Vector agent_strategy(long long state) const override;
  Vector opponent_strategy(long long state) const override;

 private:
  PolicyTable agent_side_;
  PolicyTable opponent_side_;
  std::string name_;
};

enum class GameOutcome { kAgentWin, kOpponentWin, kDraw };

struct PlayResult {
  GameOutcome outcome;
  int steps;
  double discounted_score;  // gamma^t * terminal reward, or the running
                            // discounted return for non-terminating games
};

/// Random-action episodes until scoring or max_steps; whole episodes are
/// dropped from the end to respect max_samples (0 = uncapped).
SampleCorpus collect_random_games(const GameEnv& env, int n_games,
                                  int max_steps, std::uint64_t seed,
                                  long long max_samples = 0);

PlayResult play_game(const GameEnv& env, const Player& player_a,
                     const Player& player_b, int max_steps,
                     std::uint64_t seed);

struct TournamentResult {
  int games = 0;
  int repetitions = 0;
  double wins = 0, draws = 0, losses = 0;  // per-repetition means for A
  double total_discounted_score = 0;       // per-repetition mean of the sum
  std::optional<double> score_ci_halfwidth;     // 95% Student-t over reps
  std::optional<double> win_rate_ci_halfwidth;  // on wins/games
  std::optional<double> loss_rate_ci_halfwidth;
  std::vector<double> per_rep_wins, per_rep_draws, per_rep_losses,
      per_rep_scores;
};

TournamentResult tournament(const GameEnv& env, const Player& player_a,
                            const Player& player_b, int games, int max_steps,
                            int repetitions, std::uint64_t seed,
                            int threads = 0);

/// Exhaustive two-orderings corpus over every (state, a, o) of the grid,
/// projected uniformly through LSPI; the best fixed-basis player available.
WeightVector build_benchmark_player(const SoccerConfig& cfg,
                                    const FeatureMap& features,
                                    double discount,
                                    long long state_cap = 100000);

struct LearningCurveRow {
  int corpus_games = 0;
  int repetition = 0;
  TournamentResult result;  // single-repetition tournament
};

struct LearningCurveProtocol {
  int max_episode_steps = 1000;
  long long max_samples = 0;
  int tournament_games = 1000;
  int tournament_max_steps = 100;
  int repetitions = 20;
  int lspi_max_iter = 25;
  double lspi_tol = 1e-4;
  std::uint64_t seed = 0;
  int threads = 0;
};

/// For each corpus size and repetition: collect, train with LSPI, evaluate
/// against the opponent. Size 0 plays the uniform random player.
std::vector<LearningCurveRow> learning_curve(
    const GameEnv& env, const std::vector<int>& corpus_sizes,
    std::shared_ptr<const FeatureMap> features, const Player& opponent,
    const LearningCurveProtocol& protocol);

/// Evaluates weights trained on one grid against an opponent on another;
/// features are recomputed against the target geometry.
TournamentResult cross_grid_transfer(const WeightVector& weights,
                                     const SoccerConfig& target,
                                     const Player& opponent, int games,
                                     int max_steps, int repetitions,
                                     std::uint64_t seed, bool extended,
                                     int threads = 0);

}  // namespace zsmg
