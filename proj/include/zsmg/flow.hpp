#pragma once

#include <functional>

#include "zsmg/env.hpp"
#include "zsmg/game.hpp"
#include "zsmg/linapprox.hpp"

namespace zsmg {

/// Router/server flow control over a bounded buffer. The router (agent,
/// maximizer of the negated cost) picks a low or high arrival probability;
/// the server picks a low or high departure probability.
struct FlowParams {
  int buffer_size = 100;
  double pa_low = 0.2;
  double pa_high = 0.9;
  double pd_low = 0.1;
  double pd_high = 0.8;
  std::function<double(int)> holding_cost = [](int s) {
    return 1e-4 * s * s;
  };
  double arrival_reward_coeff = -0.1;  // alpha <= 0
  double service_cost_coeff = 1.5;     // beta >= 0
  double discount = 0.95;

  void validate() const;
};

constexpr int kFlowActions = 2;  // 0 = low, 1 = high

/// R(s,a,o) = c(s) + alpha * PA_a + beta * PD_o (server-perspective cost).
double flow_cost(const FlowParams& params, int s, int a, int o);

struct FlowStep {
  int next_state;
  double reward;  // to the router: -cost
};

FlowStep flow_step(const FlowParams& params, int s, int a, int o, Rng& rng);

/// Exact product-Bernoulli model over the buffer_size + 1 states. Rewards
/// are negated costs (router = maximizing agent); no terminal states.
TabularGame flow_exact_model(const FlowParams& params);

/// Empirical model from samples_per_q next-state draws per (s,a,o).
TabularGame flow_sampled_model(const FlowParams& params, int samples_per_q,
                               Rng& rng);

/// Degree-3 polynomial block (1, x, x^2, x^3) with x = s / B, one block per
/// action pair; 16 functions total.
class FlowFeatures : public FeatureMap {
 public:
  explicit FlowFeatures(const FlowParams& params);
  int dimension() const override { return 4 * kFlowActions * kFlowActions; }
  std::string id() const override { return "flow-poly3"; }
  void evaluate(long long state, int a, int o, SparseVec& out) const override;

 private:
  int buffer_size_;
};

class FlowEnv : public GameEnv {
 public:
  explicit FlowEnv(const FlowParams& params) : params_(params) {
    params.validate();
  }
  std::string id() const override;
  int n_agent_actions() const override { return kFlowActions; }
  int n_opp_actions() const override { return kFlowActions; }
  double discount() const override { return params_.discount; }
  long long reset(Rng& rng) const override;
  StepOutcome step(long long state, int a, int o, Rng& rng) const override;
  const FlowParams& params() const { return params_; }

 private:
  FlowParams params_;
};

}  // namespace zsmg
