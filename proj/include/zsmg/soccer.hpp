#pragma once

#include <array>
#include <vector>

#include "zsmg/env.hpp"
#include "zsmg/game.hpp"
#include "zsmg/linapprox.hpp"

namespace zsmg {

/// Grid soccer board. Player A starts in column 0 and attacks the goal at
/// column C-1; player B attacks column 0. The goal zone is the central band
/// of rows: two rows for even R, one for odd R.
struct SoccerConfig {
  int rows = 4;
  int cols = 4;
  double discount = 0.9;

  int zone_top() const { return (rows - 1) / 2; }
  int zone_bottom() const { return rows / 2; }
  int n_cells() const { return rows * cols; }
  long long n_board_states() const {
    const long long n = static_cast<long long>(rows) * cols;
    return n * (n - 1) * 2;
  }
  void validate() const;
};

enum SoccerAction { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStand = 4 };
constexpr int kSoccerActions = 5;

struct SoccerState {
  int ar, ac;  // player A
  int br, bc;  // player B
  int ball;    // 0 = A, 1 = B
};

long long encode_soccer(const SoccerConfig& cfg, const SoccerState& s);
SoccerState decode_soccer(const SoccerConfig& cfg, long long code);

struct SoccerStep {
  SoccerState state;
  double reward;  // to player A
  bool terminal;
};

SoccerState soccer_reset(const SoccerConfig& cfg, Rng& rng);

/// Both moves applied in a fixed order (A first or B first); deterministic.
SoccerStep soccer_step_ordered(const SoccerConfig& cfg, const SoccerState& s,
                               int a, int o, bool a_moves_first);

/// Coin-flipped move order, then the two sequential moves.
SoccerStep soccer_step(const SoccerConfig& cfg, const SoccerState& s, int a,
                       int o, Rng& rng);

std::vector<long long> enumerate_soccer_states(const SoccerConfig& cfg);

/// Exact tabular model: board states plus one absorbing terminal sink at
/// index n_board_states(). Transition rows mix the two move orderings at
/// probability 0.5 each. Throws GameError above the state cap.
TabularGame soccer_exact_model(const SoccerConfig& cfg,
                               long long state_cap = 100000);

/// Basic (36 per action pair, 900 total) or extended (56 per pair, 1400
/// total) role-relative basis. Values are negated when player B holds the
/// ball so that phi^T w always estimates player A's return.
class SoccerFeatures : public FeatureMap {
 public:
  SoccerFeatures(const SoccerConfig& cfg, bool extended);
  int dimension() const override;
  std::string id() const override;
  void evaluate(long long state, int a, int o, SparseVec& out) const override;

  static constexpr int kBasicBlock = 36;
  static constexpr int kExtendedBlock = 56;
  /// Nonzero slot counts for the four (P1, P2) cases.
  static std::array<int, 4> case_sizes(bool extended);

 private:
  SoccerConfig cfg_;
  bool extended_;
};

class SoccerEnv : public GameEnv {
 public:
  explicit SoccerEnv(const SoccerConfig& cfg) : cfg_(cfg) { cfg.validate(); }
  std::string id() const override;
  int n_agent_actions() const override { return kSoccerActions; }
  int n_opp_actions() const override { return kSoccerActions; }
  double discount() const override { return cfg_.discount; }
  long long reset(Rng& rng) const override;
  StepOutcome step(long long state, int a, int o, Rng& rng) const override;
  const SoccerConfig& config() const { return cfg_; }

 private:
  SoccerConfig cfg_;
};

}  // namespace zsmg
