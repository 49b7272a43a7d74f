#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "webcolor/common.hpp"

namespace webcolor {

/// Source-sample weights from kernel mean matching, together with the
/// hyperparameters they were solved under. The box and sum-band constraints
/// hold at return.
struct KmmWeights {
  Eigen::VectorXd beta;
  double B = 1000.0;
  double epsilon = 1.0;
  double kernel_sigma = 0.0;
  double objective = 0.0;
  bool converged = true;

  bool feasible() const {
    double n = static_cast<double>(beta.size());
    return beta.minCoeff() >= 0.0 && beta.maxCoeff() <= B &&
           std::fabs(beta.sum() - n) <= n * epsilon + 1e-9 * std::max(1.0, n);
  }
};

struct KmmOptions {
  double B = 1000.0;
  double epsilon = 1.0;
  double sigma = 0.0;  // 0: median pairwise distance over the pooled sample
  int max_iters = 10000;
  double tol = 1e-6;
};

namespace detail {

/// Median pairwise Euclidean distance over the pooled rows, on an evenly
/// strided subsample so the cost stays quadratic in at most kCap points.
inline double median_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  constexpr Eigen::Index kCap = 500;
  std::vector<Eigen::VectorXd> pts;
  auto take = [&](const Eigen::MatrixXd& m) {
    Eigen::Index stride = std::max<Eigen::Index>(1, m.rows() / kCap);
    for (Eigen::Index i = 0; i < m.rows(); i += stride) pts.push_back(m.row(i));
  };
  take(a);
  take(b);
  std::vector<double> d;
  d.reserve(pts.size() * (pts.size() - 1) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d.push_back((pts[i] - pts[j]).norm());
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  double med = d[d.size() / 2];
  return med > 0.0 ? med : 1.0;
}

/// Projection onto {0 <= beta <= B} intersected with |sum - n| <= n*eps by
/// alternating box clipping and multiplicative rescaling onto the band.
inline void project_feasible(Eigen::VectorXd& beta, double B, double n, double eps) {
  const double lo = n * (1.0 - eps);
  const double hi = n * (1.0 + eps);
  // Rescale to just inside the band so rounding cannot push the sum back out.
  const double slack = 1e-12 * std::max(1.0, n);
  for (int pass = 0; pass < 100; ++pass) {
    beta = beta.cwiseMax(0.0).cwiseMin(B);
    double s = beta.sum();
    if (s >= lo && s <= hi) return;
    if (s > hi) {
      beta *= (hi - slack) / s;
    } else if (s > 0.0) {
      beta *= (lo + slack) / s;
    } else {
      beta.setConstant(std::min(B, (lo + slack) / n));
    }
  }
  beta = beta.cwiseMax(0.0).cwiseMin(B);
}

inline double spectral_norm(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
  double lambda = 1.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd next = m * v;
    double norm = next.norm();
    if (norm <= 0.0) break;
    lambda = norm;
    v = next / norm;
  }
  return lambda;
}

} // namespace detail

inline double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sigma) {
  return std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

/// Kernel mean matching: weights beta for the source rows minimizing
/// (1/2) beta' Phi beta - phi' beta over the box [0,B]^N' intersected with
/// the band |sum(beta) - N'| <= N' eps, where Phi is the source kernel
/// matrix and phi_i = (N'/N) sum_j k(x'_i, x_j). Solved by projected
/// gradient with a 1/||Phi|| step from beta = 1; the best feasible iterate
/// is returned, so the result is never worse than the uniform weighting.
inline KmmWeights kmm_weights(const Eigen::MatrixXd& source_X, const Eigen::MatrixXd& target_X,
                              const KmmOptions& options = {}) {
  if (source_X.cols() != target_X.cols())
    throw Error("SchemaMismatch", "source and target feature dimensions differ");
  if (source_X.rows() < 1 || target_X.rows() < 1)
    throw Error("TooFewSamples", "KMM needs at least one source and one target row");

  const Eigen::Index n_src = source_X.rows();
  const Eigen::Index n_tgt = target_X.rows();
  double sigma = options.sigma > 0.0 ? options.sigma
                                     : detail::median_distance(source_X, target_X);

  Eigen::MatrixXd phi_mat(n_src, n_src);
  parallel_for(static_cast<std::size_t>(n_src), [&](std::size_t i) {
    for (Eigen::Index j = 0; j < n_src; ++j)
      phi_mat(static_cast<Eigen::Index>(i), j) =
          rbf_kernel(source_X.row(static_cast<Eigen::Index>(i)), source_X.row(j), sigma);
  });
  // Small diagonal lift tolerates duplicate source rows.
  phi_mat.diagonal().array() += 1e-8;

  Eigen::VectorXd phi_vec(n_src);
  const double scale = static_cast<double>(n_src) / static_cast<double>(n_tgt);
  parallel_for(static_cast<std::size_t>(n_src), [&](std::size_t i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n_tgt; ++j)
      sum += rbf_kernel(source_X.row(static_cast<Eigen::Index>(i)), target_X.row(j), sigma);
    phi_vec(static_cast<Eigen::Index>(i)) = scale * sum;
  });

  auto objective = [&](const Eigen::VectorXd& b) {
    return 0.5 * b.dot(phi_mat * b) - phi_vec.dot(b);
  };

  const double n = static_cast<double>(n_src);
  double step = 1.0 / std::max(detail::spectral_norm(phi_mat), 1e-12);

  Eigen::VectorXd beta = Eigen::VectorXd::Ones(n_src);
  detail::project_feasible(beta, options.B, n, options.epsilon);
  Eigen::VectorXd best = beta;
  double best_obj = objective(beta);
  double prev_obj = best_obj;
  bool converged = false;

  for (int it = 0; it < options.max_iters; ++it) {
    Eigen::VectorXd grad = phi_mat * beta - phi_vec;
    beta -= step * grad;
    detail::project_feasible(beta, options.B, n, options.epsilon);
    double obj = objective(beta);
    if (obj < best_obj) {
      best_obj = obj;
      best = beta;
    }
    if (std::fabs(prev_obj - obj) < options.tol) {
      converged = true;
      break;
    }
    prev_obj = obj;
  }

  KmmWeights out;
  out.beta = std::move(best);
  out.B = options.B;
  out.epsilon = options.epsilon;
  out.kernel_sigma = sigma;
  out.objective = best_obj;
  out.converged = converged;
  if (!out.feasible()) throw Error("InfeasibleWeights", "KMM projection failed to land in the feasible set");
  return out;
}

} // namespace webcolor
