#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "webcolor/common.hpp"

namespace webcolor {

struct LassoOptions {
  int max_sweeps = 10000;
  double tol = 1e-8;  // max coefficient change per sweep
};

struct LassoFit {
  Eigen::VectorXd a;
  double b = 0.0;
  int sweeps = 0;
  bool converged = true;
  std::vector<double> objective_trace;  // Eq. 5 value after each sweep

  double predict(const Eigen::VectorXd& x) const { return a.dot(x) + b; }
};

/// Per-sample weighted LASSO
///   min_{a,b} sum_i beta_i (a.x_i + b - y_i)^2 + lambda ||a||_1
/// by cyclic coordinate descent with exact soft-threshold updates and a
/// closed-form intercept refresh per sweep. Every update is an exact
/// single-coordinate minimization, so the objective never increases.
inline LassoFit weighted_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights, double lambda,
                               const LassoOptions& options = {}) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (y.size() != n || weights.size() != n)
    throw Error("ShapeMismatch", "X, y and weights must agree in length");
  if (lambda < 0.0) throw Error("BadLambda", "lambda must be >= 0");
  if (weights.minCoeff() < 0.0) throw Error("BadWeights", "weights must be non-negative");
  const double wsum = weights.sum();
  if (!(wsum > 0.0)) throw Error("AllZeroWeights", "at least one weight must be positive");

  // denom_j = 2 sum_i beta_i x_ij^2, fixed across sweeps.
  Eigen::VectorXd denom(d);
  for (Eigen::Index j = 0; j < d; ++j)
    denom[j] = 2.0 * (weights.array() * X.col(j).array().square()).sum();

  LassoFit fit;
  fit.a = Eigen::VectorXd::Zero(d);
  fit.b = weights.dot(y) / wsum;

  // residual_i = y_i - a.x_i - b, kept incrementally.
  Eigen::VectorXd residual = y.array() - fit.b;

  auto objective = [&] {
    double rss = (weights.array() * residual.array().square()).sum();
    return rss + lambda * fit.a.cwiseAbs().sum();
  };

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (denom[j] <= 0.0) continue;  // weightless column stays at 0
      double old = fit.a[j];
      // z_j = 2 sum_i beta_i x_ij (residual_i + old * x_ij)
      double z = 2.0 * (weights.array() * X.col(j).array() *
                        (residual.array() + old * X.col(j).array()))
                           .sum();
      double next = 0.0;
      if (z > lambda)
        next = (z - lambda) / denom[j];
      else if (z < -lambda)
        next = (z + lambda) / denom[j];
      if (next != old) {
        residual.array() += (old - next) * X.col(j).array();
        fit.a[j] = next;
        max_change = std::max(max_change, std::fabs(next - old));
      }
    }
    double b_new = fit.b + weights.dot(residual) / wsum;
    if (b_new != fit.b) {
      residual.array() -= b_new - fit.b;
      max_change = std::max(max_change, std::fabs(b_new - fit.b));
      fit.b = b_new;
    }
    fit.objective_trace.push_back(objective());
    fit.sweeps = sweep + 1;
    if (max_change < options.tol) return fit;
  }
  fit.converged = false;
  return fit;
}

/// Smallest lambda that zeroes every coefficient of Eq. 5 on this data:
/// 2 max_j |sum_i beta_i x_ij (y_i - weighted mean of y)|.
inline double lasso_kill_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& weights) {
  double ybar = weights.dot(y) / weights.sum();
  double best = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double z = (weights.array() * X.col(j).array() * (y.array() - ybar)).sum();
    best = std::max(best, std::fabs(z));
  }
  return 2.0 * best;
}

} // namespace webcolor
