#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace zsmg {

using Rng = std::mt19937_64;

/// Derives an independent per-episode stream from (seed, index); splitmix64.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct StepOutcome {
  long long next_state;
  double reward;  // to the agent (player A / maximizer)
  bool terminal;
};

/// Simulated two-player environment over integer-encoded states.
class GameEnv {
 public:
  virtual ~GameEnv() = default;
  virtual std::string id() const = 0;
  virtual int n_agent_actions() const = 0;
  virtual int n_opp_actions() const = 0;
  virtual double discount() const = 0;
  virtual long long reset(Rng& rng) const = 0;
  virtual StepOutcome step(long long state, int a, int o, Rng& rng) const = 0;
};

}  // namespace zsmg
