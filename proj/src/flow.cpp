#include "zsmg/flow.hpp"

#include <algorithm>
#include <map>

namespace zsmg {

void FlowParams::validate() const {
  if (buffer_size < 1) throw GameError("FlowParams: buffer_size must be >= 1");
  if (!(0.0 < pa_low && pa_low < pa_high && pa_high <= 1.0))
    throw GameError("FlowParams: need 0 < PA_L < PA_H <= 1");
  if (!(0.0 <= pd_low && pd_low < pd_high && pd_high < 1.0))
    throw GameError("FlowParams: need 0 <= PD_L < PD_H < 1");
  if (arrival_reward_coeff > 0.0)
    throw GameError("FlowParams: alpha must be <= 0");
  if (service_cost_coeff < 0.0) throw GameError("FlowParams: beta must be >= 0");
  if (!(discount > 0.0 && discount < 1.0))
    throw GameError("FlowParams: discount must lie in (0, 1)");
  // c must be nonnegative, non-decreasing and convex on 0..B.
  double prev = holding_cost(0);
  if (prev < 0.0) throw GameError("FlowParams: holding cost negative at 0");
  double prev_diff = 0.0;
  for (int s = 1; s <= buffer_size; ++s) {
    const double cur = holding_cost(s);
    const double diff = cur - prev;
    if (diff < -1e-12 || diff < prev_diff - 1e-12)
      throw GameError("FlowParams: holding cost not non-decreasing convex");
    prev = cur;
    prev_diff = diff;
  }
}

namespace {

double arrival_prob(const FlowParams& p, int a) {
  return a == 0 ? p.pa_low : p.pa_high;
}
double departure_prob(const FlowParams& p, int o) {
  return o == 0 ? p.pd_low : p.pd_high;
}

}  // namespace

double flow_cost(const FlowParams& params, int s, int a, int o) {
  return params.holding_cost(s) +
         params.arrival_reward_coeff * arrival_prob(params, a) +
         params.service_cost_coeff * departure_prob(params, o);
}

FlowStep flow_step(const FlowParams& params, int s, int a, int o, Rng& rng) {
  std::bernoulli_distribution arrive(arrival_prob(params, a));
  std::bernoulli_distribution depart(departure_prob(params, o));
  const int raw = s + (arrive(rng) ? 1 : 0) - (depart(rng) ? 1 : 0);
  const int next = std::clamp(raw, 0, params.buffer_size);
  return {next, -flow_cost(params, s, a, o)};
}

TabularGame flow_exact_model(const FlowParams& params) {
  params.validate();
  TabularGame game;
  game.n_states = params.buffer_size + 1;
  game.n_agent_actions = kFlowActions;
  game.n_opp_actions = kFlowActions;
  game.discount = params.discount;
  game.transitions.resize(game.table_size());
  game.rewards.assign(game.table_size(), 0.0);
  game.terminal.assign(game.n_states, 0);

  for (int s = 0; s < game.n_states; ++s) {
    for (int a = 0; a < kFlowActions; ++a) {
      for (int o = 0; o < kFlowActions; ++o) {
        const int i = game.idx(s, a, o);
        game.rewards[i] = -flow_cost(params, s, a, o);
        const double pa = arrival_prob(params, a);
        const double pd = departure_prob(params, o);
        std::map<int, double> row;
        row[std::clamp(s + 1, 0, params.buffer_size)] += pa * (1.0 - pd);
        row[std::clamp(s - 1, 0, params.buffer_size)] += pd * (1.0 - pa);
        row[s] += pa * pd + (1.0 - pa) * (1.0 - pd);
        for (const auto& [next, prob] : row)
          if (prob > 0.0) game.transitions[i].push_back({next, prob});
      }
    }
  }
  return game;
}

TabularGame flow_sampled_model(const FlowParams& params, int samples_per_q,
                               Rng& rng) {
  if (samples_per_q < 1)
    throw GameError("flow_sampled_model: samples_per_q must be >= 1");
  TabularGame game = flow_exact_model(params);
  for (int s = 0; s < game.n_states; ++s) {
    for (int a = 0; a < kFlowActions; ++a) {
      for (int o = 0; o < kFlowActions; ++o) {
        std::map<int, int> counts;
        for (int n = 0; n < samples_per_q; ++n)
          ++counts[flow_step(params, s, a, o, rng).next_state];
        auto& row = game.transitions[game.idx(s, a, o)];
        row.clear();
        for (const auto& [next, count] : counts)
          row.push_back({next, static_cast<double>(count) / samples_per_q});
      }
    }
  }
  return game;
}

FlowFeatures::FlowFeatures(const FlowParams& params)
    : buffer_size_(params.buffer_size) {
  params.validate();
}

void FlowFeatures::evaluate(long long state, int a, int o,
                            SparseVec& out) const {
  out.clear();
  if (state < 0 || state > buffer_size_)
    throw GameError("FlowFeatures: state out of buffer range");
  if (a < 0 || a >= kFlowActions || o < 0 || o >= kFlowActions)
    throw GameError("FlowFeatures: invalid action index");
  const int base = (a * kFlowActions + o) * 4;
  const double x = static_cast<double>(state) / buffer_size_;
  out.push_back({base, 1.0});
  if (x != 0.0) {
    out.push_back({base + 1, x});
    out.push_back({base + 2, x * x});
    out.push_back({base + 3, x * x * x});
  }
}

std::string FlowEnv::id() const {
  return "flow-b" + std::to_string(params_.buffer_size);
}

long long FlowEnv::reset(Rng& rng) const {
  std::uniform_int_distribution<int> pos(0, params_.buffer_size);
  return pos(rng);
}

StepOutcome FlowEnv::step(long long state, int a, int o, Rng& rng) const {
  const FlowStep step =
      flow_step(params_, static_cast<int>(state), a, o, rng);
  return {step.next_state, step.reward, false};
}

}  // namespace zsmg
