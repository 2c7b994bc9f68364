#include <doctest.h>

#include <map>
#include <random>

#include "zsmg/linapprox.hpp"

using namespace zsmg;

namespace {

MarkovChain random_chain(std::mt19937_64& rng, int n_states = 10,
                         double gamma = 0.9) {
  MarkovChain chain;
  chain.n_states = n_states;
  chain.discount = gamma;
  chain.reward = Vector::Zero(n_states);
  chain.rows.resize(n_states);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::uniform_real_distribution<double> reward(-1.0, 1.0);
  for (int s = 0; s < n_states; ++s) {
    chain.reward[s] = reward(rng);
    std::map<int, double> row;
    // Dense-ish rows keep the chain ergodic.
    for (int s2 = 0; s2 < n_states; ++s2)
      if (s2 == (s + 1) % n_states || rng() % 3 == 0) row[s2] += mass(rng);
    double total = 0.0;
    for (auto& [s2, p] : row) total += p;
    for (auto& [s2, p] : row) chain.rows[s].push_back({s2, p / total});
    double acc = 0.0;
    for (auto& t : chain.rows[s]) acc += t.prob;
    chain.rows[s].back().prob += 1.0 - acc;
  }
  chain.validate();
  return chain;
}

Matrix random_basis(std::mt19937_64& rng, int n, int k) {
  std::normal_distribution<double> entry(0.0, 1.0);
  Matrix phi(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) phi(i, j) = entry(rng);
  return phi;
}

}  // namespace

TEST_CASE("stationary distribution of a doubly stochastic matrix is uniform") {
  MarkovChain chain;
  chain.n_states = 4;
  chain.discount = 0.9;
  chain.reward = Vector::Zero(4);
  chain.rows.resize(4);
  for (int s = 0; s < 4; ++s)
    for (int s2 = 0; s2 < 4; ++s2)
      chain.rows[s].push_back({(s + s2) % 4, s2 == 0 ? 0.4 : 0.2});
  const Vector rho = stationary_distribution(chain);
  for (int s = 0; s < 4; ++s)
    CHECK(rho[s] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("two-state chain balance equations") {
  const double p = 0.3, q = 0.7;
  MarkovChain chain;
  chain.n_states = 2;
  chain.discount = 0.9;
  chain.reward = Vector::Zero(2);
  chain.rows = {{{0, 1 - p}, {1, p}}, {{0, q}, {1, 1 - q}}};
  const Vector rho = stationary_distribution(chain);
  CHECK(rho[0] == doctest::Approx(q / (p + q)).epsilon(1e-9));
  CHECK(rho[1] == doctest::Approx(p / (p + q)).epsilon(1e-9));
}

TEST_CASE("identity chain has no unique stationary distribution") {
  MarkovChain chain;
  chain.n_states = 3;
  chain.discount = 0.9;
  chain.reward = Vector::Zero(3);
  chain.rows = {{{0, 1.0}}, {{1, 1.0}}, {{2, 1.0}}};
  CHECK_THROWS_AS(stationary_distribution(chain), NumericError);
}

TEST_CASE("periodic chain does not converge") {
  MarkovChain chain;
  chain.n_states = 2;
  chain.discount = 0.9;
  chain.reward = Vector::Zero(2);
  chain.rows = {{{1, 1.0}}, {{0, 1.0}}};
  CHECK_THROWS_AS(stationary_distribution(chain, 1e-12, 1000), NumericError);
}

TEST_CASE("weighted norm") {
  Vector rho = Vector::Constant(4, 0.25);
  CHECK(weighted_norm(Vector::Zero(4), rho) == 0.0);

  Vector v(4);
  v << 1, -2, 3, -4;
  CHECK(weighted_norm(v, rho) == doctest::Approx(v.norm() / 2.0));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  Vector w(4), r(4);
  for (int i = 0; i < 4; ++i) {
    w[i] = unit(rng) - 0.5;
    r[i] = unit(rng);
  }
  r /= r.sum();
  double naive = 0.0;
  for (int i = 0; i < 4; ++i) naive += r[i] * w[i] * w[i];
  CHECK(weighted_norm(w, r) == doctest::Approx(std::sqrt(naive)).epsilon(1e-12));
}

TEST_CASE("projection onto the full space is the identity") {
  std::mt19937_64 rng(5);
  const Matrix phi = Matrix::Identity(6, 6);
  Vector rho = Vector::Constant(6, 1.0 / 6);
  const Vector v = random_basis(rng, 6, 1).col(0);
  const Vector w = project_weighted(phi, rho, v);
  CHECK((w - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection onto constants is the weighted mean") {
  const Matrix phi = Matrix::Ones(5, 1);
  const Vector rho = Vector::Constant(5, 0.2);
  Vector v(5);
  v << 1, 2, 3, 4, 10;
  const Vector w = project_weighted(phi, rho, v);
  CHECK(w[0] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("projection matches the normal equations oracle") {
  std::mt19937_64 rng(7);
  const Matrix phi = random_basis(rng, 10, 3);
  Vector rho(10);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int i = 0; i < 10; ++i) rho[i] = unit(rng);
  rho /= rho.sum();
  const Vector v = random_basis(rng, 10, 1).col(0);

  const Vector w = project_weighted(phi, rho, v);
  // Independent normal-equation solve.
  const Matrix d = rho.asDiagonal();
  const Vector expected =
      (phi.transpose() * d * phi).fullPivLu().solve(phi.transpose() * d * v);
  CHECK((w - expected).cwiseAbs().maxCoeff() < 1e-10);

  // Residual is rho-orthogonal to every column.
  const Vector residual = phi * w - v;
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs((rho.asDiagonal() * phi.col(j)).dot(residual)) < 1e-10);
}

TEST_CASE("rank-deficient basis errors unless ridge supplied") {
  Matrix phi(4, 2);
  phi.col(0).setOnes();
  phi.col(1) = 2.0 * phi.col(0);
  const Vector rho = Vector::Constant(4, 0.25);
  Vector v(4);
  v << 1, 2, 3, 4;
  CHECK_THROWS_AS(project_weighted(phi, rho, v), NumericError);
  CHECK_NOTHROW(project_weighted(phi, rho, v, 1e-8));
}

TEST_CASE("projection idempotence and non-expansion") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix phi = random_basis(rng, 8, 3);
    Vector rho(8);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (int i = 0; i < 8; ++i) rho[i] = unit(rng);
    rho /= rho.sum();
    const Vector v1 = random_basis(rng, 8, 1).col(0);
    const Vector v2 = random_basis(rng, 8, 1).col(0);

    const Vector w1 = project_weighted(phi, rho, v1);
    const Vector w1_again = project_weighted(phi, rho, phi * w1);
    CHECK((w1_again - w1).cwiseAbs().maxCoeff() < 1e-10);

    const Vector w2 = project_weighted(phi, rho, v2);
    CHECK(weighted_norm(phi * (w1 - w2), rho) <=
          weighted_norm(v1 - v2, rho) + 1e-12);
  }
}

TEST_CASE("fixed-point weights with the identity basis solve the chain") {
  std::mt19937_64 rng(13);
  const MarkovChain chain = random_chain(rng, 8);
  const Matrix phi = Matrix::Identity(8, 8);
  const WeightVector w = fixed_point_weights(chain, phi);
  CHECK((phi * w.w - chain.exact_value()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("constant basis with constant reward") {
  MarkovChain chain;
  chain.n_states = 3;
  chain.discount = 0.8;
  chain.reward = Vector::Constant(3, 0.5);
  chain.rows = {{{1, 1.0}}, {{2, 1.0}}, {{0, 1.0}}};
  const Matrix phi = Matrix::Ones(3, 1);
  const WeightVector w =
      fixed_point_weights(chain, phi, Vector::Constant(3, 1.0 / 3));
  CHECK(w.w[0] == doctest::Approx(0.5 / 0.2).epsilon(1e-9));
}

TEST_CASE("fixed-point weights equal iterated project-backup") {
  std::mt19937_64 rng(17);
  const MarkovChain chain = random_chain(rng, 10);
  const Matrix phi = random_basis(rng, 10, 3);
  const Vector rho = stationary_distribution(chain);
  const WeightVector w = fixed_point_weights(chain, phi, rho);

  // Oracle: iterate w <- Proj(R + gamma P Phi w) to convergence.
  const Matrix p = chain.dense_transition();
  Vector w_iter = Vector::Zero(3);
  for (int iter = 0; iter < 100000; ++iter) {
    const Vector backed = chain.reward + chain.discount * p * (phi * w_iter);
    const Vector next = project_weighted(phi, rho, backed);
    const double delta = (next - w_iter).cwiseAbs().maxCoeff();
    w_iter = next;
    if (delta < 1e-14) break;
  }
  CHECK((w.w - w_iter).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("T_c is a rho-norm contraction on ergodic chains") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const MarkovChain chain = random_chain(rng, 6);
    const Vector rho = stationary_distribution(chain);
    const Matrix p = chain.dense_transition();
    const Vector v1 = random_basis(rng, 6, 1).col(0);
    const Vector v2 = random_basis(rng, 6, 1).col(0);
    const Vector t1 = chain.reward + chain.discount * p * v1;
    const Vector t2 = chain.reward + chain.discount * p * v2;
    CHECK(weighted_norm(t1 - t2, rho) <=
          chain.discount * weighted_norm(v1 - v2, rho) + 1e-12);
  }
}

TEST_CASE("pythagorean bound") {
  std::mt19937_64 rng(23);

  // Identity basis: both sides vanish.
  const MarkovChain small = random_chain(rng, 5);
  const Vector rho_small = stationary_distribution(small);
  const auto [lhs0, rhs0] =
      pythagorean_bound(small, Matrix::Identity(5, 5), rho_small);
  CHECK(lhs0 < 1e-9);
  CHECK(rhs0 < 1e-9);

  // Constant basis on a 2-state chain: closed-form check of both sides.
  MarkovChain two;
  two.n_states = 2;
  two.discount = 0.9;
  two.reward = Vector::Zero(2);
  two.reward << 1.0, 0.0;
  const double p = 0.4, q = 0.6;
  two.rows = {{{0, 1 - p}, {1, p}}, {{0, q}, {1, 1 - q}}};
  const Vector rho_two = stationary_distribution(two);
  const Matrix ones = Matrix::Ones(2, 1);
  const auto [lhs1, rhs1] = pythagorean_bound(two, ones, rho_two);
  const Vector v_star = two.exact_value();
  const double mean = rho_two.dot(v_star);
  const double proj_err = weighted_norm(
      v_star - Vector::Constant(2, mean), rho_two);
  CHECK(rhs1 == doctest::Approx(proj_err / std::sqrt(1 - 0.81)).epsilon(1e-9));
  CHECK(lhs1 <= rhs1 + 1e-9);

  // 100 random small chains.
  for (int trial = 0; trial < 100; ++trial) {
    const MarkovChain chain = random_chain(rng, 6);
    const Matrix phi = random_basis(rng, 6, 2);
    const Vector rho = stationary_distribution(chain);
    const auto [lhs, rhs] = pythagorean_bound(chain, phi, rho);
    CHECK(lhs <= rhs + 1e-9);
  }
}
