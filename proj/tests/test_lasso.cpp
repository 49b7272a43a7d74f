#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "webcolor/lasso.hpp"

using namespace webcolor;

namespace {

struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
};

Problem random_problem(std::mt19937_64& gen, int n, int d) {
  Problem p;
  p.X.resize(n, d);
  p.y.resize(n);
  p.w.resize(n);
  Eigen::VectorXd truth(d);
  for (int j = 0; j < d; ++j) truth[j] = 2.0 * rng::uniform01(gen) - 1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) p.X(i, j) = 2.0 * rng::uniform01(gen) - 1.0;
    p.y[i] = p.X.row(i).dot(truth) + 0.05 * (rng::uniform01(gen) - 0.5);
    p.w[i] = 0.2 + 2.0 * rng::uniform01(gen);
  }
  return p;
}

/// Closed-form weighted least squares with intercept (test oracle).
std::pair<Eigen::VectorXd, double> weighted_ols(const Problem& p) {
  int d = static_cast<int>(p.X.cols());
  Eigen::MatrixXd Xa(p.X.rows(), d + 1);
  Xa.leftCols(d) = p.X;
  Xa.col(d).setOnes();
  Eigen::MatrixXd A = Xa.transpose() * p.w.asDiagonal() * Xa;
  Eigen::VectorXd b = Xa.transpose() * p.w.asDiagonal() * p.y;
  Eigen::VectorXd sol = A.ldlt().solve(b);
  return {sol.head(d), sol[d]};
}

} // namespace

TEST_CASE("lambda=0 reproduces weighted least squares", "[lasso][oracle]") {
  std::mt19937_64 gen = rng::substream(103, "lasso-ols");
  for (int trial = 0; trial < 10; ++trial) {
    Problem p = random_problem(gen, 50, 5);
    LassoFit fit = weighted_lasso(p.X, p.y, p.w, 0.0);
    auto [a_ols, b_ols] = weighted_ols(p);
    CHECK((fit.a - a_ols).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(fit.b == Catch::Approx(b_ols).margin(1e-6));
  }
}

TEST_CASE("1-D unweighted slope equals OLS", "[lasso]") {
  Eigen::MatrixXd X(4, 1);
  X << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 2.1, 3.9, 6.1, 7.9;
  LassoFit fit = weighted_lasso(X, y, Eigen::VectorXd::Ones(4), 0.0);
  // Hand OLS: slope = cov/var = (sum (x-2.5)(y-5)) / (sum (x-2.5)^2) = 9.7/5.
  CHECK(fit.a[0] == Catch::Approx(9.7 / 5.0).margin(1e-8));
  CHECK(fit.b == Catch::Approx(5.0 - (9.7 / 5.0) * 2.5).margin(1e-8));
}

TEST_CASE("the kill lambda zeroes every coefficient", "[lasso][oracle]") {
  std::mt19937_64 gen = rng::substream(107, "lasso-kill");
  for (int trial = 0; trial < 10; ++trial) {
    Problem p = random_problem(gen, 40, 6);
    double kill = lasso_kill_lambda(p.X, p.y, p.w);
    LassoFit fit = weighted_lasso(p.X, p.y, p.w, kill * 1.000001);
    CHECK(fit.a.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fit.b == Catch::Approx(p.w.dot(p.y) / p.w.sum()).margin(1e-10));

    // Just below the threshold at least one coefficient survives.
    LassoFit below = weighted_lasso(p.X, p.y, p.w, kill * 0.99);
    CHECK(below.a.cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("zero-weight samples do not influence the fit", "[lasso]") {
  std::mt19937_64 gen = rng::substream(109, "lasso-zero");
  Problem p = random_problem(gen, 30, 4);
  // Zero out weights of five samples, then corrupt those samples wildly.
  Problem corrupted = p;
  for (int i = 0; i < 5; ++i) {
    corrupted.w[i] = 0.0;
    corrupted.y[i] = 1000.0;
  }
  Problem deleted;
  deleted.X = p.X.bottomRows(25);
  deleted.y = p.y.tail(25);
  deleted.w = p.w.tail(25);

  LassoFit a = weighted_lasso(corrupted.X, corrupted.y, corrupted.w, 0.3);
  LassoFit b = weighted_lasso(deleted.X, deleted.y, deleted.w, 0.3);
  CHECK((a.a - b.a).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(a.b == Catch::Approx(b.b).margin(1e-9));
}

TEST_CASE("objective never increases across sweeps", "[lasso][property]") {
  std::mt19937_64 gen = rng::substream(113, "lasso-mono");
  for (int trial = 0; trial < 10; ++trial) {
    Problem p = random_problem(gen, 60, 8);
    LassoFit fit = weighted_lasso(p.X, p.y, p.w, 0.5);
    REQUIRE(!fit.objective_trace.empty());
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
      CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] + 1e-10);
  }
}

TEST_CASE("the L1 norm shrinks as lambda grows", "[lasso][property]") {
  std::mt19937_64 gen = rng::substream(127, "lasso-path");
  Problem p = random_problem(gen, 50, 6);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.1, 0.5, 2.0, 10.0, 50.0}) {
    LassoFit fit = weighted_lasso(p.X, p.y, p.w, lambda);
    double l1 = fit.a.cwiseAbs().sum();
    CHECK(l1 <= prev + 1e-9);
    prev = l1;
  }
}

TEST_CASE("all-zero weights are rejected", "[lasso]") {
  Eigen::MatrixXd X(3, 2);
  X.setOnes();
  Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  try {
    weighted_lasso(X, y, Eigen::VectorXd::Zero(3), 0.1);
    FAIL("expected AllZeroWeights");
  } catch (const Error& e) {
    CHECK(e.code() == "AllZeroWeights");
  }
}
