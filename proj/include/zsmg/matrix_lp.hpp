#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsmg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximin value and mixed strategy of a zero-sum matrix game.
/// Rows are agent actions, columns are opponent actions.
struct MaximinSolution {
  double value = 0.0;
  Vector strategy;                 // length m, nonnegative, sums to 1
  std::vector<int> tight_columns;  // constraints active within 1e-7
};

/// Solves max_pi min_o pi^T M[:,o] by primal simplex with Bland's rule on
/// the game shifted by K = 1 + max|entry| so the shifted value is positive.
/// Deterministic for identical input. Throws LpError on pivoting breakdown.
MaximinSolution solve_maximin(const Matrix& payoff);

/// argmin_o strategy^T M[:,o]; ties broken by lowest column index.
int opponent_best_response(const Matrix& payoff, const Vector& strategy);

}  // namespace zsmg
