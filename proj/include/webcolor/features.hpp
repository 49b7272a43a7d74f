#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "webcolor/color.hpp"
#include "webcolor/common.hpp"

namespace webcolor {

inline constexpr const char* kFeatureSchemaVersion = "theme-features/1";

/// Fixed-length descriptor of a theme. Dimension and per-dimension names
/// come from the schema manifest; values are finite by construction.
struct FeatureVector {
  std::vector<double> values;
  std::string schema_version = kFeatureSchemaVersion;
};

namespace detail {

struct ChannelSpec {
  const char* space;
  const char* channel;
  bool circular;  // hue: minor-arc differences, circular means
};

// Hue is stored as a fraction of a turn (degrees/360) so every channel
// lives on a comparable scale.
inline const std::array<ChannelSpec, 12>& channel_specs() {
  static const std::array<ChannelSpec, 12> specs = {{
      {"RGB", "r", false},
      {"RGB", "g", false},
      {"RGB", "b", false},
      {"HSV", "h", true},
      {"HSV", "s", false},
      {"HSV", "v", false},
      {"CIELab", "L", false},
      {"CIELab", "a", false},
      {"CIELab", "b", false},
      {"CHSV", "scos_h", false},
      {"CHSV", "ssin_h", false},
      {"CHSV", "v", false},
  }};
  return specs;
}

inline constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

inline double circular_mean_turns(const double* t, const double* w, int n) {
  double c = 0.0, s = 0.0;
  for (int i = 0; i < n; ++i) {
    double rad = t[i] * kTwoPi;
    c += w[i] * std::cos(rad);
    s += w[i] * std::sin(rad);
  }
  if (c * c + s * s < 1e-24) return 0.0;
  double turns = std::atan2(s, c) / kTwoPi;
  return turns < 0.0 ? turns + 1.0 : turns;
}

inline double minor_arc_turns(double a, double b) {
  double d = std::fabs(a - b);
  d = std::fmod(d, 1.0);
  return std::min(d, 1.0 - d);
}

} // namespace detail

/// Per-dimension names, e.g. "CIELab.L.sorted_adjacent_diff.2". The order
/// defines the vector layout and the CSV column order.
inline const std::vector<std::string>& feature_schema() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& spec : detail::channel_specs()) {
      std::string base = std::string(spec.space) + "." + spec.channel + ".";
      for (int i = 0; i < 5; ++i) out.push_back(base + "raw." + std::to_string(i));
      for (int i = 0; i < 5; ++i) out.push_back(base + "sorted." + std::to_string(i));
      for (int i = 0; i < 4; ++i) out.push_back(base + "adjacent_diff." + std::to_string(i));
      // sorted_adjacent_diff.0 is the largest gap, .3 the minimum.
      for (int i = 0; i < 4; ++i) out.push_back(base + "sorted_adjacent_diff." + std::to_string(i));
      out.push_back(base + "weighted_mean");
      out.push_back(base + "mean");
      out.push_back(base + "stddev");
      out.push_back(base + "median");
      out.push_back(base + "max");
      out.push_back(base + "min");
      out.push_back(base + "range");
    }
    for (const char* space : {"RGB", "HSV", "CIELab", "CHSV"}) {
      std::string base = std::string(space) + ".plane.";
      out.push_back(base + "normal.0");
      out.push_back(base + "normal.1");
      out.push_back(base + "normal.2");
      out.push_back(base + "sse");
    }
    for (int i = 0; i < 5; ++i) out.push_back("proportion." + std::to_string(i));
    return out;
  }();
  return names;
}

inline std::size_t feature_dimension() { return feature_schema().size(); }

/// Deterministic theme descriptor: per channel the raw and sorted values,
/// adjacent differences in theme order and sorted by magnitude, and the
/// usual summary statistics; per space a total-least-squares plane fit
/// (unit normal + SSE); plus the five proportions. Means are additionally
/// weighted by the pixel proportions; hue uses circular means and
/// minor-arc differences.
inline FeatureVector extract_features(const ColorTheme& theme) {
  FeatureVector fv;
  fv.values.reserve(feature_dimension());

  // Channel values per space, hue stored in turns.
  std::array<std::array<std::array<double, 5>, 3>, 4> chan{};  // [space][channel][slot]
  for (int s = 0; s < 5; ++s) {
    const ColorRGB& c = theme.colors()[s];
    ColorCoords hsv = to_hsv(c);
    ColorCoords lab = to_lab(c);
    ColorCoords chsv = to_chsv(c);
    chan[0][0][s] = c.r;
    chan[0][1][s] = c.g;
    chan[0][2][s] = c.b;
    chan[1][0][s] = hsv.c1 / 360.0;
    chan[1][1][s] = hsv.c2;
    chan[1][2][s] = hsv.c3;
    chan[2][0][s] = lab.c1;
    chan[2][1][s] = lab.c2;
    chan[2][2][s] = lab.c3;
    chan[3][0][s] = chsv.c1;
    chan[3][1][s] = chsv.c2;
    chan[3][2][s] = chsv.c3;
  }

  const std::array<double, 5>& props = theme.proportions();
  static const std::array<double, 5> kUniform = {0.2, 0.2, 0.2, 0.2, 0.2};

  for (int spec_i = 0; spec_i < 12; ++spec_i) {
    const auto& spec = detail::channel_specs()[spec_i];
    const std::array<double, 5>& t = chan[spec_i / 3][spec_i % 3];

    for (double v : t) fv.values.push_back(v);

    std::array<double, 5> sorted = t;
    std::sort(sorted.begin(), sorted.end());
    for (double v : sorted) fv.values.push_back(v);

    std::array<double, 4> diffs{};
    for (int i = 0; i < 4; ++i)
      diffs[i] = spec.circular ? detail::minor_arc_turns(t[i + 1], t[i]) : t[i + 1] - t[i];
    for (double v : diffs) fv.values.push_back(v);

    std::array<double, 4> mags{};
    for (int i = 0; i < 4; ++i) mags[i] = std::fabs(diffs[i]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    for (double v : mags) fv.values.push_back(v);

    if (spec.circular) {
      fv.values.push_back(detail::circular_mean_turns(t.data(), props.data(), 5));
      fv.values.push_back(detail::circular_mean_turns(t.data(), kUniform.data(), 5));
    } else {
      double wm = 0.0, m = 0.0;
      for (int i = 0; i < 5; ++i) {
        wm += props[i] * t[i];
        m += t[i] / 5.0;
      }
      fv.values.push_back(wm);
      fv.values.push_back(m);
    }
    double mean = 0.0;
    for (double v : t) mean += v / 5.0;
    double var = 0.0;
    for (double v : t) var += (v - mean) * (v - mean) / 5.0;
    fv.values.push_back(std::sqrt(var));
    fv.values.push_back(sorted[2]);
    fv.values.push_back(sorted[4]);
    fv.values.push_back(sorted[0]);
    fv.values.push_back(sorted[4] - sorted[0]);
  }

  // Total-least-squares plane through the 5 points of each space: the
  // normal is the scatter matrix's smallest principal direction, SSE its
  // eigenvalue. The normal's sign is fixed by its largest component.
  for (int sp = 0; sp < 4; ++sp) {
    Eigen::Matrix<double, 5, 3> pts;
    for (int s = 0; s < 5; ++s)
      for (int c = 0; c < 3; ++c) pts(s, c) = chan[sp][c][s];
    Eigen::RowVector3d mean = pts.colwise().mean();
    Eigen::Matrix<double, 5, 3> centered = pts.rowwise() - mean;
    Eigen::Matrix3d scatter = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
    Eigen::Vector3d normal = eig.eigenvectors().col(0);  // ascending eigenvalues
    int arg = 0;
    normal.cwiseAbs().maxCoeff(&arg);
    if (normal[arg] < 0.0) normal = -normal;
    fv.values.push_back(normal.x());
    fv.values.push_back(normal.y());
    fv.values.push_back(normal.z());
    fv.values.push_back(std::max(0.0, eig.eigenvalues()[0]));
  }

  for (double p : props) fv.values.push_back(p);

  for (double v : fv.values)
    if (!std::isfinite(v)) throw Error("NonFiniteFeature", "feature vector contains NaN/Inf");
  return fv;
}

/// Pearson correlation of each feature dimension against the ratings,
/// ranked by absolute value. Constant dimensions get r = 0.
struct FeatureCorrelation {
  std::string name;
  double r = 0.0;
  const char* sign() const { return r >= 0.0 ? "positive" : "negative"; }
};

inline std::vector<FeatureCorrelation> feature_rating_correlation(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const std::vector<std::string>& names) {
  if (X.rows() < 3) throw Error("TooFewSamples", "correlation needs at least 3 samples");
  if (X.rows() != y.size() || static_cast<std::size_t>(X.cols()) != names.size())
    throw Error("ShapeMismatch", "feature matrix, ratings and names disagree");
  if (!y.allFinite()) throw Error("NonFiniteRating", "ratings contain NaN/Inf");

  const double n = static_cast<double>(X.rows());
  double ym = y.mean();
  double ysd = std::sqrt((y.array() - ym).square().sum() / n);

  std::vector<FeatureCorrelation> out(names.size());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double xm = X.col(j).mean();
    Eigen::ArrayXd xc = X.col(j).array() - xm;
    double xsd = std::sqrt(xc.square().sum() / n);
    double r = 0.0;
    if (xsd > 0.0 && ysd > 0.0)
      r = (xc * (y.array() - ym)).sum() / (n * xsd * ysd);
    out[static_cast<std::size_t>(j)] = {names[static_cast<std::size_t>(j)], r};
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::fabs(a.r) > std::fabs(b.r);
  });
  return out;
}

} // namespace webcolor
