#pragma once

#include "zsmg/linapprox.hpp"

namespace zsmg {

/// One indicator per (s, a, o) triple; makes linear methods exactly tabular.
class IndicatorFeatures : public FeatureMap {
 public:
  IndicatorFeatures(int n_states, int n_agent_actions, int n_opp_actions)
      : n_states_(n_states), na_(n_agent_actions), no_(n_opp_actions) {}

  int dimension() const override { return n_states_ * na_ * no_; }
  std::string id() const override {
    return "indicator-" + std::to_string(n_states_) + "x" +
           std::to_string(na_) + "x" + std::to_string(no_);
  }
  void evaluate(long long state, int a, int o, SparseVec& out) const override {
    out.clear();
    out.push_back(
        {static_cast<int>((state * na_ + a) * no_ + o), 1.0});
  }

 private:
  int n_states_;
  int na_;
  int no_;
};

}  // namespace zsmg
