#pragma once

#include <cstdint>
#include <unordered_map>

#include "zsmg/linapprox.hpp"

namespace zsmg {

struct GameSample {
  long long state;
  int agent_action;
  int opp_action;
  double reward;
  long long next_state;
  bool terminal;
};

struct SampleCorpus {
  std::string env_id;
  int n_agent_actions = 0;
  int n_opp_actions = 0;
  std::uint64_t seed = 0;
  int episodes = 0;
  long long sample_cap = 0;  // 0 = uncapped
  std::vector<GameSample> samples;
};

struct LstdAccumulator {
  Matrix a_hat;
  Vector b_hat;

  static LstdAccumulator zeros(int k) {
    return {Matrix::Zero(k, k), Vector::Zero(k)};
  }
};

struct MinimaxDecision {
  Vector strategy;       // agent mixed strategy at the state
  double value = 0.0;    // maximin value of phi^T w over (a, o)
  int opponent_action = 0;  // minimizing opponent response
};

/// Per-iteration cache of minimax decisions keyed by encoded state; each
/// distinct next-state costs one LP per LSPI iteration.
using PolicyCache = std::unordered_map<long long, MinimaxDecision>;

/// M[a,o] = phi(state,a,o)^T w, solved as a matrix game.
MinimaxDecision policy_from_weights(const Vector& w, const FeatureMap& features,
                                    long long state, int n_agent_actions,
                                    int n_opp_actions);

/// Rank-one LSTDQ update for one sample:
///   A += phi(s,a,o) (phi(s,a,o) - gamma sum_a' pi(s',a') phi(s',a',o'))^T
///   b += phi(s,a,o) r
/// with a zero next-feature term for terminal samples. pi(s') and o' come
/// from the minimax LP under policy_weights, memoized in cache when given.
void accumulate(LstdAccumulator& acc, const GameSample& sample,
                const Vector& policy_weights, const FeatureMap& features,
                double discount, int n_agent_actions, int n_opp_actions,
                PolicyCache* cache = nullptr);

/// Builds (A, b) over the corpus and solves (A + ridge I) w = b.
/// ridge < 0 selects the default 1e-6 * trace(A) / k.
WeightVector lstdq_solve(const SampleCorpus& corpus,
                         const Vector& policy_weights,
                         const FeatureMap& features, double discount,
                         double ridge = -1.0);

struct LspiResult {
  WeightVector weights;
  std::vector<double> weight_deltas;  // ||w_{t+1} - w_t||_2 per iteration
  bool converged = false;
};

/// Least-squares policy iteration: repeat LSTDQ under the implied minimax
/// policy until ||dw||_2 < tol or max_iter passes.
LspiResult lspi(const SampleCorpus& corpus, const FeatureMap& features,
                double discount, int max_iter = 25, double tol = 1e-4,
                double ridge = -1.0);

}  // namespace zsmg
