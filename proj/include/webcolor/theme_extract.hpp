#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "webcolor/clustering.hpp"
#include "webcolor/color.hpp"
#include "webcolor/common.hpp"
#include "webcolor/fixed_part.hpp"
#include "webcolor/image.hpp"

namespace webcolor {

enum class SpatialDistanceMode {
  MeanPosition,   // distance between weighted mean pixel positions, O(n)
  AveragedPairs,  // mean pairwise pixel distance, O(n^2); small inputs only
};

struct ThemeExtractOptions {
  ClusteringOptions clustering;          // lambda defaults to 70
  SpatialDistanceMode spatial_mode = SpatialDistanceMode::MeanPosition;
  std::string source_id;
};

/// Slot assignment (cluster index -> left-to-right slot) minimizing the
/// squared disagreement between normalized rank gaps and normalized spatial
/// distances, searched over all 120 permutations. Ties go to the
/// lexicographically smallest permutation.
inline std::array<int, 5> order_theme_distances(const Eigen::Matrix<double, 5, 5>& dist) {
  double max_d = dist.maxCoeff();
  Eigen::Matrix<double, 5, 5> dn =
      max_d > 0.0 ? Eigen::Matrix<double, 5, 5>(dist / max_d)
                  : Eigen::Matrix<double, 5, 5>(Eigen::Matrix<double, 5, 5>::Zero());

  std::array<int, 5> perm{0, 1, 2, 3, 4};
  std::array<int, 5> best = perm;
  double best_obj = std::numeric_limits<double>::infinity();
  do {
    double obj = 0.0;
    for (int i = 0; i < 5; ++i) {
      for (int j = i + 1; j < 5; ++j) {
        double gap = std::abs(perm[i] - perm[j]) / 4.0 - dn(i, j);
        obj += gap * gap;
      }
    }
    if (obj < best_obj) {
      best_obj = obj;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Ordering from per-cluster mean positions.
inline std::array<int, 5> order_theme(const std::array<Eigen::Vector2d, 5>& positions) {
  Eigen::Matrix<double, 5, 5> dist = Eigen::Matrix<double, 5, 5>::Zero();
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      dist(i, j) = dist(j, i) = (positions[i] - positions[j]).norm();
  return order_theme_distances(dist);
}

/// Average within-cluster sum: mean over the 5 theme colors of the summed
/// Lab distances from each pixel to its nearest theme color. The distances
/// are unsquared. Lower means a more representative theme.
inline double acs(const std::vector<Eigen::Vector3d>& lab_pixels, const ColorTheme& theme) {
  if (lab_pixels.empty()) throw Error("EmptyPixelSet", "aCS needs at least one pixel");
  std::array<Eigen::Vector3d, 5> centers;
  for (int k = 0; k < 5; ++k) centers[k] = lab_vec(theme.colors()[k]);
  double sum = 0.0;
  for (const auto& p : lab_pixels) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : centers) best = std::min(best, (p - c).norm());
    sum += best;
  }
  return sum / 5.0;
}

struct ThemeExtraction {
  ColorTheme theme;
  ClusteringResult clustering;
  std::array<int, 5> order;  // cluster index -> slot
};

/// Clusters weighted Lab points (with their pixel positions) and orders the
/// centroids into a theme. The shared core behind the image-level entry
/// points.
inline ThemeExtraction extract_theme_points(const WeightedPoints& data,
                                            const std::vector<Eigen::Vector2d>& pixel_pos,
                                            const ThemeExtractOptions& options = {}) {
  if (data.size() < 5)
    throw Error("TooFewPoints", "need at least 5 pixels with positive weight");
  if (pixel_pos.size() != data.size())
    throw Error("ShapeMismatch", "pixel positions must match the point count");

  ClusteringResult result = robust_kmeans(data, 5, options.clustering);

  std::array<double, 5> wsum{};
  std::array<double, 5> props{};
  std::array<Eigen::Vector2d, 5> positions;
  positions.fill(Eigen::Vector2d::Zero());
  double total_w = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    int k = result.assignments[i];
    wsum[k] += data.weights[i];
    positions[k] += data.weights[i] * pixel_pos[i];
    total_w += data.weights[i];
  }
  Eigen::Vector2d overall = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < data.size(); ++i) overall += data.weights[i] * pixel_pos[i];
  overall /= total_w;
  for (int k = 0; k < 5; ++k) {
    props[k] = wsum[k] / total_w;
    positions[k] = wsum[k] > 0.0 ? Eigen::Vector2d(positions[k] / wsum[k]) : overall;
  }
  result.positions.assign(positions.begin(), positions.end());

  Eigen::Matrix<double, 5, 5> dist = Eigen::Matrix<double, 5, 5>::Zero();
  if (options.spatial_mode == SpatialDistanceMode::MeanPosition) {
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        dist(i, j) = dist(j, i) = (positions[i] - positions[j]).norm();
  } else {
    // Weighted mean of pairwise pixel distances between the two clusters.
    for (std::size_t a = 0; a < data.size(); ++a) {
      for (std::size_t b = a + 1; b < data.size(); ++b) {
        int i = std::min(result.assignments[a], result.assignments[b]);
        int j = std::max(result.assignments[a], result.assignments[b]);
        if (i == j) continue;
        dist(i, j) += data.weights[a] * data.weights[b] * (pixel_pos[a] - pixel_pos[b]).norm();
      }
    }
    for (int i = 0; i < 5; ++i) {
      for (int j = i + 1; j < 5; ++j) {
        if (wsum[i] > 0.0 && wsum[j] > 0.0) dist(i, j) /= wsum[i] * wsum[j];
        dist(j, i) = dist(i, j);
      }
    }
  }

  std::array<int, 5> order = order_theme_distances(dist);
  std::array<ColorRGB, 5> colors;
  std::array<double, 5> proportions{};
  for (int k = 0; k < 5; ++k) {
    colors[order[k]] = lab_to_rgb(result.centroids[k]);
    proportions[order[k]] = props[k];
  }
  return {ColorTheme(colors, proportions, options.source_id), std::move(result), order};
}

/// Pixels of every block with a positive sample count, weighted by that
/// count, clustered in CIELab with the outlier-aware model; centroids are
/// converted back to sRGB and ordered left-to-right by spatial structure.
inline ThemeExtraction extract_theme(const PageImage& image, const SampledBlocks& sampled,
                                     const ThemeExtractOptions& options = {}) {
  WeightedPoints data;
  std::vector<Eigen::Vector2d> pixel_pos;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      auto count = sampled.count_at_pixel(x, y);
      if (count <= 0) continue;
      data.points.push_back(lab_vec(image.at(x, y)));
      data.weights.push_back(static_cast<double>(count));
      pixel_pos.emplace_back(x, y);
    }
  }
  return extract_theme_points(data, pixel_pos, options);
}

/// Whole-image theme with uniform weights (no fixed-part location).
inline ThemeExtraction extract_theme_whole(const PageImage& image,
                                           const ThemeExtractOptions& options = {}) {
  BlockGrid grid = partition_blocks(image, 1, 1);
  return extract_theme(image, uniform_sampled_blocks(grid), options);
}

/// Lab points of the pixels the sampling selected (weight > 0), used by the
/// aCS evaluation.
inline std::vector<Eigen::Vector3d> fixed_part_pixels(const PageImage& image,
                                                      const SampledBlocks& sampled) {
  std::vector<Eigen::Vector3d> out;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      if (sampled.count_at_pixel(x, y) > 0) out.push_back(lab_vec(image.at(x, y)));
  return out;
}

/// Renders the 5-swatch strip for a theme.
inline PageImage render_swatch(const ColorTheme& theme, int swatch_size = 48) {
  PageImage img = make_image(swatch_size * 5, swatch_size);
  for (int s = 0; s < 5; ++s)
    for (int y = 0; y < swatch_size; ++y)
      for (int x = 0; x < swatch_size; ++x) img.at(s * swatch_size + x, y) = theme.colors()[s];
  return img;
}

} // namespace webcolor
