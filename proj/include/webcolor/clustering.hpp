#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "webcolor/common.hpp"

namespace webcolor {

/// Points in CIELab with per-point positive weights (block sample counts).
struct WeightedPoints {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;

  std::size_t size() const noexcept { return points.size(); }

  static WeightedPoints uniform(std::vector<Eigen::Vector3d> pts) {
    WeightedPoints wp;
    wp.weights.assign(pts.size(), 1.0);
    wp.points = std::move(pts);
    return wp;
  }
};

struct ClusteringResult {
  std::vector<Eigen::Vector3d> centroids;
  std::vector<int> assignments;
  std::vector<Eigen::Vector3d> outlier_vectors;  // zero for non-outliers
  double objective = 0.0;
  std::vector<Eigen::Vector2d> positions;  // per-cluster mean pixel position, if known
  std::vector<double> objective_trace;     // one value per iteration of the best restart
  int iterations = 0;
  int empty_cluster_reseeds = 0;

  int outlier_count() const {
    int n = 0;
    for (const auto& o : outlier_vectors)
      if (o.squaredNorm() > 0.0) ++n;
    return n;
  }
};

struct ClusteringOptions {
  double lambda = 70.0;
  int max_iters = 100;
  int restarts = 5;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

namespace detail {

/// Closed-form minimizer of w*||r - o||^2 + lambda*||o|| over o: group
/// soft-thresholding along the residual direction.
inline Eigen::Vector3d outlier_shrink(const Eigen::Vector3d& residual, double weight,
                                      double lambda) {
  double norm = residual.norm();
  if (norm <= 0.0) return Eigen::Vector3d::Zero();
  double scale = 1.0 - lambda / (2.0 * weight * norm);
  return scale > 0.0 ? Eigen::Vector3d(residual * scale) : Eigen::Vector3d::Zero();
}

/// Weighted k-means++ seeding. Shared by the robust and plain paths so the
/// two consume randomness identically for a given generator state.
inline std::vector<Eigen::Vector3d> kmeanspp_init(const WeightedPoints& data, int k,
                                                  std::mt19937_64& gen) {
  const std::size_t n = data.size();
  auto draw = [&](const std::vector<double>& mass) -> std::size_t {
    double total = 0.0;
    for (double m : mass) total += m;
    if (total <= 0.0) {
      // Every candidate coincides with a center; fall back to plain weights.
      total = 0.0;
      for (double w : data.weights) total += w;
      double u = rng::uniform(gen, total), acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += data.weights[i];
        if (u < acc) return i;
      }
      return n - 1;
    }
    double u = rng::uniform(gen, total), acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += mass[i];
      if (u < acc) return i;
    }
    return n - 1;
  };

  std::vector<Eigen::Vector3d> centers;
  centers.reserve(k);
  centers.push_back(data.points[draw(data.weights)]);
  std::vector<double> d2(n);
  std::vector<double> mass(n);
  while (static_cast<int>(centers.size()) < k) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, (data.points[i] - c).squaredNorm());
      d2[i] = best;
      mass[i] = data.weights[i] * best;
    }
    centers.push_back(data.points[draw(mass)]);
  }
  return centers;
}

struct LloydState {
  std::vector<Eigen::Vector3d> centroids;
  std::vector<int> assign;
  std::vector<Eigen::Vector3d> outliers;
  int reseeds = 0;
};

/// Nearest-centroid assignment under ||x_i - m_k - o_i||^2, then re-seeding
/// of any emptied cluster with the point farthest from its centroid (which
/// strictly lowers the objective).
inline void assign_and_fix(const WeightedPoints& data, int k, LloydState& s) {
  const std::size_t n = data.size();
  std::vector<std::int64_t> sizes(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d shifted = data.points[i] - s.outliers[i];
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int c = 0; c < k; ++c) {
      double d = (shifted - s.centroids[c]).squaredNorm();
      if (d < best) {
        best = d;
        best_k = c;
      }
    }
    s.assign[i] = best_k;
    ++sizes[best_k];
  }

  std::vector<char> used(n, 0);
  for (int c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    double far = -1.0;
    std::size_t far_i = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i] || sizes[s.assign[i]] <= 1) continue;
      double d = (data.points[i] - s.outliers[i] - s.centroids[s.assign[i]]).squaredNorm();
      if (d > far) {
        far = d;
        far_i = i;
      }
    }
    if (far < 0.0) continue;  // nothing movable (all clusters singletons)
    used[far_i] = 1;
    --sizes[s.assign[far_i]];
    s.assign[far_i] = c;
    ++sizes[c];
    s.centroids[c] = data.points[far_i] - s.outliers[far_i];
    ++s.reseeds;
  }
}

inline void update_centroids(const WeightedPoints& data, int k, LloydState& s) {
  std::vector<Eigen::Vector3d> sums(k, Eigen::Vector3d::Zero());
  std::vector<double> wsum(k, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    sums[s.assign[i]] += data.weights[i] * (data.points[i] - s.outliers[i]);
    wsum[s.assign[i]] += data.weights[i];
  }
  for (int c = 0; c < k; ++c)
    if (wsum[c] > 0.0) s.centroids[c] = sums[c] / wsum[c];
}

inline double objective_value(const WeightedPoints& data, const LloydState& s, double lambda) {
  double obj = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    obj += data.weights[i] *
           (data.points[i] - s.centroids[s.assign[i]] - s.outliers[i]).squaredNorm();
    obj += lambda * s.outliers[i].norm();
  }
  return obj;
}

inline void validate_input(const WeightedPoints& data, int k) {
  if (k < 1) throw Error("BadK", "cluster count must be >= 1");
  if (data.size() < static_cast<std::size_t>(k))
    throw Error("TooFewPoints", "need at least K points to form K clusters");
  if (data.weights.size() != data.points.size())
    throw Error("BadWeights", "weights and points must have the same length");
  for (double w : data.weights)
    if (!(w > 0.0)) throw Error("BadWeights", "weights must be positive");
}

template <bool WithOutliers>
ClusteringResult lloyd_descent(const WeightedPoints& data, int k,
                               const ClusteringOptions& options) {
  validate_input(data, k);
  const std::size_t n = data.size();

  ClusteringResult best;
  best.objective = std::numeric_limits<double>::infinity();

  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 gen = rng::substream(options.seed, "kmeans-restart", static_cast<std::uint64_t>(r));
    LloydState s;
    s.centroids = kmeanspp_init(data, k, gen);
    s.assign.assign(n, 0);
    s.outliers.assign(n, Eigen::Vector3d::Zero());

    std::vector<double> trace;
    double prev = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < options.max_iters; ++iter) {
      assign_and_fix(data, k, s);
      if constexpr (WithOutliers) {
        for (std::size_t i = 0; i < n; ++i)
          s.outliers[i] = outlier_shrink(data.points[i] - s.centroids[s.assign[i]],
                                         data.weights[i], options.lambda);
      }
      update_centroids(data, k, s);
      double obj = objective_value(data, s, WithOutliers ? options.lambda : 0.0);
      assert(obj <= prev * (1.0 + 1e-12) + 1e-9 && "descent objective increased");
      trace.push_back(obj);
      if (prev - obj < options.tol) {
        ++iter;
        break;
      }
      prev = obj;
    }

    double obj = trace.empty() ? 0.0 : trace.back();
    if (obj < best.objective) {
      best.centroids = s.centroids;
      best.assignments = s.assign;
      best.outlier_vectors = s.outliers;
      best.objective = obj;
      best.objective_trace = std::move(trace);
      best.iterations = iter;
      best.empty_cluster_reseeds = s.reseeds;
    }
  }
  return best;
}

} // namespace detail

/// Outlier-aware weighted k-means: block-coordinate descent on
///   sum_i w_i ||x_i - m_a(i) - o_i||^2 + lambda * sum_i ||o_i||,
/// alternating nearest-centroid assignment, group soft-thresholding of the
/// per-point outlier vectors, and weighted centroid means. Every block step
/// is an exact minimization, so the objective never increases.
inline ClusteringResult robust_kmeans(const WeightedPoints& data, int k,
                                      const ClusteringOptions& options) {
  if (options.lambda < 0.0) throw Error("BadLambda", "lambda must be >= 0");
  return detail::lloyd_descent<true>(data, k, options);
}

/// Plain weighted k-means (no outlier vectors), sharing the seeding and
/// stopping rules above. The robust variant converges to this as lambda
/// grows large.
inline ClusteringResult weighted_kmeans(const WeightedPoints& data, int k,
                                        const ClusteringOptions& options) {
  return detail::lloyd_descent<false>(data, k, options);
}

} // namespace webcolor
