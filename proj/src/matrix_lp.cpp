#include "zsmg/matrix_lp.hpp"

#include <cmath>
#include <limits>

namespace zsmg {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kActiveTol = 1e-7;

}  // namespace

// The game M (m x l) is shifted by K = 1 + max|entry| so its value v is
// positive. With x_o = q_o / v for the opponent's mixed strategy q, the
// opponent side becomes the standard-form LP
//     maximize sum(x)  subject to  M_shift x <= 1, x >= 0,
// whose optimum is 1/v. The agent strategy is recovered from the duals,
// i.e. the reduced costs of the slack columns in the final tableau.
MaximinSolution solve_maximin(const Matrix& payoff) {
  const int m = static_cast<int>(payoff.rows());
  const int l = static_cast<int>(payoff.cols());
  if (m < 1 || l < 1) throw LpError("solve_maximin: empty payoff matrix");
  if (!payoff.allFinite()) throw LpError("solve_maximin: non-finite entries");

  const double shift = 1.0 + payoff.cwiseAbs().maxCoeff();

  // Tableau: m constraint rows over columns [x_0..x_{l-1} | s_0..s_{m-1} | rhs],
  // plus the reduced-cost row d (maximization: pivot while some d_j > 0).
  const int ncols = l + m;
  Matrix tab(m, ncols + 1);
  tab.leftCols(l) = payoff.array() + shift;
  tab.middleCols(l, m) = Matrix::Identity(m, m);
  tab.col(ncols).setOnes();

  Vector d = Vector::Zero(ncols);
  d.head(l).setOnes();
  double objective = 0.0;

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = l + i;

  const long max_pivots = 4L * (m + l) * (m + l) + 64;
  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots)
      throw LpError("solve_maximin: pivot limit exceeded (cycling?)");

    // Bland: entering column = lowest index with positive reduced cost.
    int enter = -1;
    for (int j = 0; j < ncols; ++j) {
      if (d[j] > kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;  // optimal

    // Ratio test; Bland tie-break on the lowest basis index.
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = tab(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = tab(i, ncols) / a;
      if (ratio < best_ratio - kPivotTol ||
          (ratio < best_ratio + kPivotTol &&
           (leave < 0 || basis[i] < basis[leave]))) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave < 0)
      throw LpError(
          "solve_maximin: unbounded shifted LP; shift = " +
          std::to_string(shift));

    const double pv = tab(leave, enter);
    if (std::abs(pv) < kPivotTol)
      throw LpError("solve_maximin: pivot breakdown, |pivot| = " +
                    std::to_string(std::abs(pv)));
    tab.row(leave) /= pv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = tab(i, enter);
      if (f != 0.0) tab.row(i) -= f * tab.row(leave);
    }
    const double fd = d[enter];
    d -= fd * tab.row(leave).head(ncols);
    objective += fd * tab(leave, ncols);
    basis[leave] = enter;
  }

  if (objective <= 0.0)
    throw LpError("solve_maximin: nonpositive shifted objective");
  const double shifted_value = 1.0 / objective;

  // Duals live in the slack columns of the reduced-cost row.
  Vector strategy = Vector::Zero(m);
  for (int a = 0; a < m; ++a) strategy[a] = -d[l + a] * shifted_value;
  for (int a = 0; a < m; ++a) strategy[a] = std::max(strategy[a], 0.0);
  const double total = strategy.sum();
  if (total <= 0.0) throw LpError("solve_maximin: degenerate dual strategy");
  strategy /= total;

  MaximinSolution sol;
  sol.value = shifted_value - shift;
  sol.strategy = strategy;

  // Feasibility guard: the strategy must meet every column near the value.
  const Vector column_values = payoff.transpose() * strategy;
  if (column_values.minCoeff() < sol.value - kActiveTol)
    throw LpError("solve_maximin: infeasible strategy recovered");
  for (int o = 0; o < l; ++o)
    if (column_values[o] <= sol.value + kActiveTol) sol.tight_columns.push_back(o);
  return sol;
}

int opponent_best_response(const Matrix& payoff, const Vector& strategy) {
  if (strategy.size() != payoff.rows())
    throw LpError("opponent_best_response: strategy/matrix shape mismatch");
  const Vector column_values = payoff.transpose() * strategy;
  // Support columns of an optimal strategy tie exactly in principle; a
  // strict comparison would let rounding noise pick different columns for
  // nearly identical inputs. Lowest index wins within the tolerance.
  const double tol =
      1e-9 * (1.0 + column_values.cwiseAbs().maxCoeff());
  int best = 0;
  for (int o = 1; o < column_values.size(); ++o)
    if (column_values[o] < column_values[best] - tol) best = o;
  return best;
}

}  // namespace zsmg
