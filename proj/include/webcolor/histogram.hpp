#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "webcolor/color.hpp"
#include "webcolor/common.hpp"
#include "webcolor/image.hpp"

namespace webcolor {

/// Uniform grid over CIELab. L covers [0,100]; a and b cover [-110,110],
/// wide enough for the whole sRGB gamut.
struct HistogramLayout {
  int bins_per_axis = 4;

  static constexpr double kLMin = 0.0, kLMax = 100.0;
  static constexpr double kAbMin = -110.0, kAbMax = 110.0;

  int bin_count() const noexcept { return bins_per_axis * bins_per_axis * bins_per_axis; }

  int bin_of(const Eigen::Vector3d& lab) const {
    auto axis = [this](double v, double lo, double hi) {
      double t = (v - lo) / (hi - lo) * bins_per_axis;
      return std::clamp(static_cast<int>(t), 0, bins_per_axis - 1);
    };
    int bl = axis(lab.x(), kLMin, kLMax);
    int ba = axis(lab.y(), kAbMin, kAbMax);
    int bb = axis(lab.z(), kAbMin, kAbMax);
    return (bl * bins_per_axis + ba) * bins_per_axis + bb;
  }

  Eigen::Vector3d bin_center(int index) const {
    int bb = index % bins_per_axis;
    int ba = (index / bins_per_axis) % bins_per_axis;
    int bl = index / (bins_per_axis * bins_per_axis);
    auto center = [this](int b, double lo, double hi) {
      return lo + (b + 0.5) * (hi - lo) / bins_per_axis;
    };
    return {center(bl, kLMin, kLMax), center(ba, kAbMin, kAbMax), center(bb, kAbMin, kAbMax)};
  }

  friend bool operator==(const HistogramLayout&, const HistogramLayout&) = default;
};

/// Normalized color mass over the Lab grid; bins sum to 1.
struct ColorHistogram {
  HistogramLayout layout;
  std::vector<double> bins;

  Eigen::Vector3d bin_center(int index) const { return layout.bin_center(index); }
};

/// Histogram of the pixels inside `rect`, normalized to unit mass.
inline ColorHistogram block_histogram(const PageImage& image, const BlockRect& rect,
                                      int bins_per_axis = 4) {
  if (rect.x < 0 || rect.y < 0 || rect.w < 1 || rect.h < 1 ||
      rect.x + rect.w > image.width || rect.y + rect.h > image.height)
    throw Error("BadRect", "rect outside image");
  ColorHistogram hist;
  hist.layout.bins_per_axis = bins_per_axis;
  hist.bins.assign(hist.layout.bin_count(), 0.0);
  for (int y = rect.y; y < rect.y + rect.h; ++y)
    for (int x = rect.x; x < rect.x + rect.w; ++x)
      hist.bins[hist.layout.bin_of(lab_vec(image.at(x, y)))] += 1.0;
  double total = static_cast<double>(rect.w) * rect.h;
  for (double& b : hist.bins) b /= total;
  return hist;
}

namespace detail {

/// Minimal-cost transportation between positive supplies and demands with
/// equal totals, by the transportation simplex (northwest-corner start,
/// u/v potentials, cycle pivoting). Falls back to Bland's entering rule if
/// the default most-negative rule spins on a degenerate basis.
class TransportSimplex {
public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                   std::vector<double> cost)
      : n_(static_cast<int>(supply.size())), m_(static_cast<int>(demand.size())),
        supply_(std::move(supply)), demand_(std::move(demand)), cost_(std::move(cost)) {}

  double solve() {
    flow_.assign(static_cast<std::size_t>(n_) * m_, 0.0);
    basic_.assign(static_cast<std::size_t>(n_) * m_, false);
    northwest_corner();

    const long cap_best = 200 + 40L * (n_ + m_) * (n_ + m_);
    const long cap_bland = 400L * n_ * m_ + 10000;
    bool bland = false;
    for (long it = 0;; ++it) {
      if (!bland && it > cap_best) bland = true;
      if (it > cap_best + cap_bland)
        throw Error("TransportStall", "transportation simplex did not terminate");
      compute_potentials();
      int ei = -1, ej = -1;
      if (!find_entering(bland, ei, ej)) break;
      pivot(ei, ej);
    }

    double total = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) total += flow_[idx(i, j)] * cost_[idx(i, j)];
    return total;
  }

private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * m_ + j; }

  void northwest_corner() {
    std::vector<double> a = supply_, b = demand_;
    int i = 0, j = 0;
    while (true) {
      double q = std::min(a[i], b[j]);
      flow_[idx(i, j)] = q;
      basic_[idx(i, j)] = true;
      a[i] -= q;
      b[j] -= q;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (i == n_ - 1) ++j;
      else if (j == m_ - 1) ++i;
      else if (a[i] <= b[j]) ++i;
      else ++j;
    }
  }

  // Nodes: rows 0..n-1, columns n..n+m-1; basic cells are tree edges.
  void compute_potentials() {
    u_.assign(n_, 0.0);
    v_.assign(m_, 0.0);
    std::vector<char> seen(n_ + m_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      if (node < n_) {
        for (int j = 0; j < m_; ++j) {
          if (basic_[idx(node, j)] && !seen[n_ + j]) {
            v_[j] = cost_[idx(node, j)] - u_[node];
            seen[n_ + j] = 1;
            stack.push_back(n_ + j);
          }
        }
      } else {
        int j = node - n_;
        for (int i = 0; i < n_; ++i) {
          if (basic_[idx(i, j)] && !seen[i]) {
            u_[i] = cost_[idx(i, j)] - v_[j];
            seen[i] = 1;
            stack.push_back(i);
          }
        }
      }
    }
  }

  bool find_entering(bool bland, int& ei, int& ej) const {
    constexpr double kTol = -1e-12;
    double best = kTol;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < m_; ++j) {
        if (basic_[idx(i, j)]) continue;
        double red = cost_[idx(i, j)] - u_[i] - v_[j];
        if (red < best) {
          best = red;
          ei = i;
          ej = j;
          if (bland) return true;
        }
      }
    }
    return ei >= 0 && best < kTol;
  }

  // Unique tree path from row ei to column ej; with the entering edge it
  // closes the pivot cycle. Signs alternate starting with + on the entry.
  void pivot(int ei, int ej) {
    std::vector<int> parent(n_ + m_, -1);
    std::vector<int> queue{ei};
    parent[ei] = ei;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int node = queue[qi];
      if (node == n_ + ej) break;
      if (node < n_) {
        for (int j = 0; j < m_; ++j)
          if (basic_[idx(node, j)] && parent[n_ + j] < 0) {
            parent[n_ + j] = node;
            queue.push_back(n_ + j);
          }
      } else {
        int j = node - n_;
        for (int i = 0; i < n_; ++i)
          if (basic_[idx(i, j)] && parent[i] < 0) {
            parent[i] = node;
            queue.push_back(i);
          }
      }
    }

    // Path nodes ej-col ... ei-row; edges between consecutive nodes.
    std::vector<std::pair<int, int>> minus, plus;
    int node = n_ + ej;
    bool positive = false;  // edge (path[0]=col ej, parent) is the first -θ edge
    while (node != ei) {
      int par = parent[node];
      int row = node < n_ ? node : par;
      int col = node < n_ ? par : node;
      (positive ? plus : minus).emplace_back(row, col - n_);
      positive = !positive;
      node = par;
    }

    double theta = std::numeric_limits<double>::infinity();
    std::pair<int, int> leaving{-1, -1};
    for (const auto& [i, j] : minus) {
      double f = flow_[idx(i, j)];
      if (f < theta || (f == theta && (leaving.first < 0 || idx(i, j) < idx(leaving.first, leaving.second)))) {
        theta = f;
        leaving = {i, j};
      }
    }

    flow_[idx(ei, ej)] += theta;
    for (const auto& [i, j] : plus) flow_[idx(i, j)] += theta;
    for (const auto& [i, j] : minus) flow_[idx(i, j)] -= theta;
    basic_[idx(ei, ej)] = true;
    basic_[idx(leaving.first, leaving.second)] = false;
    flow_[idx(leaving.first, leaving.second)] = 0.0;
  }

  int n_, m_;
  std::vector<double> supply_, demand_, cost_;
  std::vector<double> flow_, u_, v_;
  std::vector<char> basic_;
};

} // namespace detail

/// Earth mover's distance between two histograms on the same layout, with
/// Euclidean Lab distance between bin centers as the ground metric.
inline double emd(const ColorHistogram& h1, const ColorHistogram& h2) {
  if (!(h1.layout == h2.layout) || h1.bins.size() != h2.bins.size())
    throw Error("LayoutMismatch", "histograms use different bin layouts");

  std::vector<int> src, dst;
  std::vector<double> supply, demand;
  for (int b = 0; b < static_cast<int>(h1.bins.size()); ++b) {
    if (h1.bins[b] > 0.0) {
      src.push_back(b);
      supply.push_back(h1.bins[b]);
    }
    if (h2.bins[b] > 0.0) {
      dst.push_back(b);
      demand.push_back(h2.bins[b]);
    }
  }
  if (src.empty() || dst.empty())
    throw Error("EmptyHistogram", "histogram has no mass");

  // Balance exactly; normalization noise would otherwise leave mass stranded.
  double s1 = std::accumulate(supply.begin(), supply.end(), 0.0);
  double s2 = std::accumulate(demand.begin(), demand.end(), 0.0);
  for (double& d : demand) d *= s1 / s2;

  std::vector<double> cost(src.size() * dst.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    Eigen::Vector3d ci = h1.bin_center(src[i]);
    for (std::size_t j = 0; j < dst.size(); ++j)
      cost[i * dst.size() + j] = (ci - h2.bin_center(dst[j])).norm();
  }

  double total = detail::TransportSimplex(std::move(supply), std::move(demand), std::move(cost)).solve();
  return total / s1;
}

} // namespace webcolor
