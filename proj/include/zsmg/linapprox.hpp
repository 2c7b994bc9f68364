#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zsmg/game.hpp"
#include "zsmg/matrix_lp.hpp"

namespace zsmg {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FeatureEntry {
  int index;
  double value;
};
using SparseVec = std::vector<FeatureEntry>;

/// Deterministic sparse basis phi(s, a, o) of fixed dimension.
class FeatureMap {
 public:
  virtual ~FeatureMap() = default;
  virtual int dimension() const = 0;
  virtual std::string id() const = 0;
  virtual void evaluate(long long state, int a, int o, SparseVec& out) const = 0;

  Vector dense(long long state, int a, int o) const {
    SparseVec sv;
    evaluate(state, a, o, sv);
    Vector v = Vector::Zero(dimension());
    for (const auto& e : sv) v[e.index] += e.value;
    return v;
  }
};

struct WeightVector {
  Vector w;
  std::string features;
  double gamma = 0.0;
  std::string env;
};

/// Uncontrolled Markov chain with per-state continuation reward.
struct MarkovChain {
  int n_states = 0;
  std::vector<std::vector<Transition>> rows;
  Vector reward;
  double discount = 0.0;

  void validate() const;
  Matrix dense_transition() const;
  /// Exact value (I - gamma P)^{-1} R; small chains only.
  Vector exact_value() const;
};

/// Power iteration on rho^T P; uniqueness is checked by restarting from a
/// second initial vector. Throws NumericError on non-convergence or when
/// the two starts disagree (reducible/periodic chain).
Vector stationary_distribution(const MarkovChain& chain, double tol = 1e-12,
                               long max_iter = 1000000);

/// ||v||_rho = sqrt(sum rho(s) v(s)^2).
double weighted_norm(const Vector& v, const Vector& rho);

/// w = argmin ||Phi w - v||_rho. Rank-deficient bases are an error unless a
/// ridge is supplied.
Vector project_weighted(const Matrix& phi, const Vector& rho, const Vector& v,
                        std::optional<double> ridge = std::nullopt);

/// Projected-Bellman fixed-point weights. With rho supplied, solves
/// Phi^T diag(rho) (Phi - gamma P Phi) w = Phi^T diag(rho) R; without it,
/// the unweighted (uniform) form. The fixed-point identity
/// Phi w = Proj(T_c Phi w) is verified internally to 1e-8.
WeightVector fixed_point_weights(const MarkovChain& chain, const Matrix& phi,
                                 std::optional<Vector> rho = std::nullopt);

/// Returns (||V* - Vhat||_rho, (1-gamma^2)^{-1/2} ||V* - Proj V*||_rho) and
/// asserts lhs <= rhs + 1e-9.
std::pair<double, double> pythagorean_bound(const MarkovChain& chain,
                                            const Matrix& phi,
                                            const Vector& rho);

}  // namespace zsmg
