#include "zsmg/lspi.hpp"

#include <cmath>

namespace zsmg {

MinimaxDecision policy_from_weights(const Vector& w, const FeatureMap& features,
                                    long long state, int n_agent_actions,
                                    int n_opp_actions) {
  Matrix m(n_agent_actions, n_opp_actions);
  SparseVec sv;
  for (int a = 0; a < n_agent_actions; ++a) {
    for (int o = 0; o < n_opp_actions; ++o) {
      features.evaluate(state, a, o, sv);
      double q = 0.0;
      for (const auto& e : sv) q += e.value * w[e.index];
      m(a, o) = q;
    }
  }
  MaximinSolution sol;
  try {
    sol = solve_maximin(m);
  } catch (const LpError& e) {
    throw LpError(std::string(e.what()) + " (encoded state " +
                  std::to_string(state) + ")");
  }
  MinimaxDecision decision;
  decision.strategy = sol.strategy;
  decision.value = sol.value;
  decision.opponent_action = opponent_best_response(m, sol.strategy);
  return decision;
}

namespace {

const MinimaxDecision& decide(long long state, const Vector& w,
                              const FeatureMap& features, int na, int no,
                              PolicyCache* cache, MinimaxDecision& scratch) {
  if (cache) {
    auto it = cache->find(state);
    if (it != cache->end()) return it->second;
    auto [ins, ok] =
        cache->emplace(state, policy_from_weights(w, features, state, na, no));
    return ins->second;
  }
  scratch = policy_from_weights(w, features, state, na, no);
  return scratch;
}

}  // namespace

void accumulate(LstdAccumulator& acc, const GameSample& sample,
                const Vector& policy_weights, const FeatureMap& features,
                double discount, int n_agent_actions, int n_opp_actions,
                PolicyCache* cache) {
  SparseVec cur;
  features.evaluate(sample.state, sample.agent_action, sample.opp_action, cur);

  // Next-feature term: mixture over a' under the minimax strategy at s',
  // against the minimizing opponent action o'. Zero for terminal samples.
  SparseVec next;
  if (!sample.terminal) {
    MinimaxDecision scratch;
    const MinimaxDecision& d =
        decide(sample.next_state, policy_weights, features, n_agent_actions,
               n_opp_actions, cache, scratch);
    SparseVec sv;
    for (int a = 0; a < n_agent_actions; ++a) {
      const double p = d.strategy[a];
      if (p <= 0.0) continue;
      features.evaluate(sample.next_state, a, d.opponent_action, sv);
      for (const auto& e : sv) next.push_back({e.index, p * e.value});
    }
  }

  for (const auto& row : cur) {
    acc.b_hat[row.index] += row.value * sample.reward;
    for (const auto& col : cur)
      acc.a_hat(row.index, col.index) += row.value * col.value;
    for (const auto& col : next)
      acc.a_hat(row.index, col.index) -= discount * row.value * col.value;
  }
}

WeightVector lstdq_solve(const SampleCorpus& corpus,
                         const Vector& policy_weights,
                         const FeatureMap& features, double discount,
                         double ridge) {
  const int k = features.dimension();
  LstdAccumulator acc = LstdAccumulator::zeros(k);
  PolicyCache cache;
  for (const auto& sample : corpus.samples)
    accumulate(acc, sample, policy_weights, features, discount,
               corpus.n_agent_actions, corpus.n_opp_actions, &cache);

  if (ridge < 0.0) ridge = 1e-6 * acc.a_hat.trace() / k;
  Matrix system = acc.a_hat;
  if (ridge > 0.0) system += ridge * Matrix::Identity(k, k);

  Eigen::PartialPivLU<Matrix> lu(system);
  const Vector w = lu.solve(acc.b_hat);
  // Pivot ratio flags singular systems even when b happens to be consistent.
  const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double pivot_ratio =
      pivots.maxCoeff() > 0.0 ? pivots.minCoeff() / pivots.maxCoeff() : 0.0;
  const double scale = std::max(1.0, acc.b_hat.cwiseAbs().maxCoeff());
  if (!w.allFinite() || pivot_ratio < 1e-14 ||
      (system * w - acc.b_hat).cwiseAbs().maxCoeff() > 1e-6 * scale)
    throw NumericError(
        "lstdq_solve: singular or ill-conditioned system; supply a positive "
        "ridge");
  WeightVector result;
  result.w = w;
  result.features = features.id();
  result.gamma = discount;
  result.env = corpus.env_id;
  return result;
}

LspiResult lspi(const SampleCorpus& corpus, const FeatureMap& features,
                double discount, int max_iter, double tol, double ridge) {
  if (corpus.samples.empty())
    throw NumericError("lspi: empty corpus");
  LspiResult result;
  Vector w = Vector::Zero(features.dimension());
  for (int iter = 0; iter < max_iter; ++iter) {
    WeightVector next;
    try {
      next = lstdq_solve(corpus, w, features, discount, ridge);
    } catch (const std::exception& e) {
      throw NumericError("lspi iteration " + std::to_string(iter) + ": " +
                         e.what());
    }
    const double delta = (next.w - w).norm();
    result.weight_deltas.push_back(delta);
    w = next.w;
    result.weights = std::move(next);
    if (delta < tol) {
      result.converged = true;
      break;
    }
  }
  result.weights.env = corpus.env_id;
  return result;
}

}  // namespace zsmg
