#include "zsmg/linapprox.hpp"

#include <Eigen/QR>
#include <cmath>

namespace zsmg {

void MarkovChain::validate() const {
  if (n_states < 1) throw NumericError("MarkovChain: empty");
  if (rows.size() != static_cast<std::size_t>(n_states) ||
      reward.size() != n_states)
    throw NumericError("MarkovChain: size mismatch");
  if (!(discount > 0.0 && discount <= 1.0))
    throw NumericError("MarkovChain: discount must lie in (0, 1]");
  for (int s = 0; s < n_states; ++s) {
    double total = 0.0;
    for (const auto& t : rows[s]) {
      if (t.state < 0 || t.state >= n_states || t.prob < 0.0)
        throw NumericError("MarkovChain: bad transition at state " +
                           std::to_string(s));
      total += t.prob;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw NumericError("MarkovChain: row " + std::to_string(s) +
                         " sums to " + std::to_string(total));
  }
}

Matrix MarkovChain::dense_transition() const {
  Matrix p = Matrix::Zero(n_states, n_states);
  for (int s = 0; s < n_states; ++s)
    for (const auto& t : rows[s]) p(s, t.state) += t.prob;
  return p;
}

Vector MarkovChain::exact_value() const {
  const Matrix a =
      Matrix::Identity(n_states, n_states) - discount * dense_transition();
  return a.partialPivLu().solve(reward);
}

namespace {

// One power-iteration run of rho^T P from a given start.
std::optional<Vector> power_run(const MarkovChain& chain, Vector rho,
                                double tol, long max_iter) {
  rho /= rho.sum();
  for (long iter = 0; iter < max_iter; ++iter) {
    Vector next = Vector::Zero(chain.n_states);
    for (int s = 0; s < chain.n_states; ++s)
      for (const auto& t : chain.rows[s]) next[t.state] += rho[s] * t.prob;
    next /= next.sum();
    const double delta = (next - rho).cwiseAbs().maxCoeff();
    rho = std::move(next);
    if (delta < tol) return rho;
  }
  return std::nullopt;
}

Matrix weighted_gram(const Matrix& phi, const Vector& rho) {
  return phi.transpose() * rho.asDiagonal() * phi;
}

}  // namespace

Vector stationary_distribution(const MarkovChain& chain, double tol,
                               long max_iter) {
  Vector start_a = Vector::Ones(chain.n_states);
  // Second start concentrated away from uniform; exposes reducible chains.
  Vector start_b = Vector::Constant(chain.n_states, 1e-3);
  start_b[0] = 1.0;

  auto rho_a = power_run(chain, start_a, tol, max_iter);
  auto rho_b = power_run(chain, start_b, tol, max_iter);
  if (!rho_a || !rho_b)
    throw NumericError(
        "stationary_distribution: power iteration did not converge "
        "(periodic chain?)");
  if ((*rho_a - *rho_b).cwiseAbs().maxCoeff() > 1e-8)
    throw NumericError(
        "stationary_distribution: starts disagree, stationary distribution "
        "is not unique (reducible chain?)");
  return *rho_a;
}

double weighted_norm(const Vector& v, const Vector& rho) {
  if (v.size() != rho.size()) throw NumericError("weighted_norm: size mismatch");
  return std::sqrt(rho.dot(v.cwiseAbs2()));
}

Vector project_weighted(const Matrix& phi, const Vector& rho, const Vector& v,
                        std::optional<double> ridge) {
  if (phi.rows() != rho.size() || phi.rows() != v.size())
    throw NumericError("project_weighted: shape mismatch");
  const Matrix gram = weighted_gram(phi, rho);
  const Vector rhs = phi.transpose() * (rho.asDiagonal() * v);
  if (ridge) {
    const Matrix reg =
        gram + *ridge * Matrix::Identity(phi.cols(), phi.cols());
    return reg.ldlt().solve(rhs);
  }
  // Rank check on the rho-weighted basis.
  const Matrix scaled = rho.cwiseSqrt().asDiagonal() * phi;
  Eigen::ColPivHouseholderQR<Matrix> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < phi.cols()) {
    std::string dep;
    const auto perm = qr.colsPermutation().indices();
    for (int j = qr.rank(); j < phi.cols(); ++j)
      dep += (dep.empty() ? "" : ", ") + std::to_string(perm[j]);
    throw NumericError(
        "project_weighted: basis columns dependent on support of rho "
        "(columns " +
        dep + "); supply a ridge to regularize");
  }
  return gram.ldlt().solve(rhs);
}

WeightVector fixed_point_weights(const MarkovChain& chain, const Matrix& phi,
                                 std::optional<Vector> rho) {
  if (phi.rows() != chain.n_states)
    throw NumericError("fixed_point_weights: basis row count mismatch");
  const Matrix p = chain.dense_transition();
  const Vector weighting =
      rho ? *rho : Vector::Ones(chain.n_states);

  const Matrix lhs = phi.transpose() * weighting.asDiagonal() *
                     (phi - chain.discount * p * phi);
  const Vector rhs = phi.transpose() * (weighting.asDiagonal() * chain.reward);

  Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible())
    throw NumericError("fixed_point_weights: singular k x k system");
  WeightVector result;
  result.w = lu.solve(rhs);
  result.gamma = chain.discount;

  // Fixed-point identity Phi w = Proj(T_c Phi w) under the same weighting.
  const Vector vhat = phi * result.w;
  const Vector backed = chain.reward + chain.discount * p * vhat;
  const Vector reproj = phi * project_weighted(phi, weighting / weighting.sum(),
                                               backed, 1e-13);
  if ((reproj - vhat).cwiseAbs().maxCoeff() > 1e-8)
    throw NumericError("fixed_point_weights: fixed-point verification failed");
  return result;
}

std::pair<double, double> pythagorean_bound(const MarkovChain& chain,
                                            const Matrix& phi,
                                            const Vector& rho) {
  if (chain.discount >= 1.0)
    throw NumericError("pythagorean_bound requires discount < 1");
  const Vector v_star = chain.exact_value();
  const Vector v_hat = phi * fixed_point_weights(chain, phi, rho).w;
  const double lhs = weighted_norm(v_star - v_hat, rho);

  const Vector projected = phi * project_weighted(phi, rho, v_star);
  const double rhs = weighted_norm(v_star - projected, rho) /
                     std::sqrt(1.0 - chain.discount * chain.discount);
  if (lhs > rhs + 1e-9)
    throw NumericError("pythagorean_bound violated: lhs = " +
                       std::to_string(lhs) + ", rhs = " + std::to_string(rhs));
  return {lhs, rhs};
}

}  // namespace zsmg
