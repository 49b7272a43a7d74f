#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "webcolor/common.hpp"

namespace webcolor {

/// A color in sRGB, channels in [0,1]. 8-bit input is stored as v/255.
struct ColorRGB {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const ColorRGB&, const ColorRGB&) = default;
};

enum class ColorSpace { RGB, HSV, CIELab, CHSV };

inline const char* to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::RGB: return "RGB";
    case ColorSpace::HSV: return "HSV";
    case ColorSpace::CIELab: return "CIELab";
    case ColorSpace::CHSV: return "CHSV";
  }
  return "?";
}

/// Channel triple in a named space. HSV hue is degrees in [0,360); gray
/// pixels get hue 0 so conversions stay total. CHSV is the cone embedding
/// (S*cos H, S*sin H, V), which makes hue differences metric.
struct ColorCoords {
  ColorSpace space = ColorSpace::RGB;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

namespace detail {

constexpr double kDeg = 180.0 / 3.14159265358979323846;

// sRGB <-> linear light.
inline double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

// sRGB -> XYZ (D65). The white point is taken as the image of (1,1,1)
// under this matrix so that pure white maps exactly to L=100, a=b=0.
constexpr double kM[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}};
constexpr double kWhite[3] = {kM[0][0] + kM[0][1] + kM[0][2],
                              kM[1][0] + kM[1][1] + kM[1][2],
                              kM[2][0] + kM[2][1] + kM[2][2]};

inline double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

inline double lab_f_inv(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d ? t * t * t : 3.0 * d * d * (t - 4.0 / 29.0);
}

inline const std::array<std::array<double, 3>, 3>& rgb_matrix_inverse() {
  static const std::array<std::array<double, 3>, 3> inv = [] {
    const auto& m = kM;
    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                 m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    std::array<std::array<double, 3>, 3> out;
    out[0] = {(m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det,
              (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det,
              (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det};
    out[1] = {(m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det,
              (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det,
              (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det};
    out[2] = {(m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det,
              (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det,
              (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det};
    return out;
  }();
  return inv;
}

} // namespace detail

inline ColorCoords to_hsv(const ColorRGB& c) {
  double mx = std::max({c.r, c.g, c.b});
  double mn = std::min({c.r, c.g, c.b});
  double delta = mx - mn;
  double h = 0.0;
  if (delta > 0.0) {
    if (mx == c.r)
      h = 60.0 * std::fmod((c.g - c.b) / delta + 6.0, 6.0);
    else if (mx == c.g)
      h = 60.0 * ((c.b - c.r) / delta + 2.0);
    else
      h = 60.0 * ((c.r - c.g) / delta + 4.0);
  }
  if (h >= 360.0) h = 0.0;
  double s = mx > 0.0 ? delta / mx : 0.0;
  return {ColorSpace::HSV, h, s, mx};
}

inline ColorRGB hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0);
  double c = v * s;
  double hp = h / 60.0;
  double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1)      { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else             { r = c; b = x; }
  double m = v - c;
  return {r + m, g + m, b + m};
}

inline ColorCoords to_lab(const ColorRGB& c) {
  using namespace detail;
  double lin[3] = {srgb_to_linear(c.r), srgb_to_linear(c.g), srgb_to_linear(c.b)};
  double xyz[3];
  for (int i = 0; i < 3; ++i)
    xyz[i] = kM[i][0] * lin[0] + kM[i][1] * lin[1] + kM[i][2] * lin[2];
  double fx = lab_f(xyz[0] / kWhite[0]);
  double fy = lab_f(xyz[1] / kWhite[1]);
  double fz = lab_f(xyz[2] / kWhite[2]);
  return {ColorSpace::CIELab, 116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

/// Inverse of to_lab with per-channel clipping to the sRGB gamut.
inline ColorRGB lab_to_rgb(double L, double a, double b) {
  using namespace detail;
  double fy = (L + 16.0) / 116.0;
  double fx = fy + a / 500.0;
  double fz = fy - b / 200.0;
  double xyz[3] = {kWhite[0] * lab_f_inv(fx), kWhite[1] * lab_f_inv(fy),
                   kWhite[2] * lab_f_inv(fz)};
  const auto& inv = rgb_matrix_inverse();
  ColorRGB out;
  double* ch[3] = {&out.r, &out.g, &out.b};
  for (int i = 0; i < 3; ++i) {
    double lin = inv[i][0] * xyz[0] + inv[i][1] * xyz[1] + inv[i][2] * xyz[2];
    *ch[i] = std::clamp(linear_to_srgb(std::clamp(lin, 0.0, 1.0)), 0.0, 1.0);
  }
  return out;
}

inline ColorRGB lab_to_rgb(const Eigen::Vector3d& lab) {
  return lab_to_rgb(lab.x(), lab.y(), lab.z());
}

inline ColorCoords to_chsv(const ColorRGB& c) {
  ColorCoords hsv = to_hsv(c);
  double rad = hsv.c1 / detail::kDeg;
  return {ColorSpace::CHSV, hsv.c2 * std::cos(rad), hsv.c2 * std::sin(rad), hsv.c3};
}

inline ColorCoords convert_color(const ColorRGB& c, ColorSpace space) {
  switch (space) {
    case ColorSpace::RGB: return {ColorSpace::RGB, c.r, c.g, c.b};
    case ColorSpace::HSV: return to_hsv(c);
    case ColorSpace::CIELab: return to_lab(c);
    case ColorSpace::CHSV: return to_chsv(c);
  }
  throw Error("BadColorSpace", "unknown color space");
}

inline Eigen::Vector3d lab_vec(const ColorRGB& c) {
  ColorCoords l = to_lab(c);
  return {l.c1, l.c2, l.c3};
}

/// Euclidean distance in CIELab.
inline double delta_e(const ColorRGB& c1, const ColorRGB& c2) {
  ColorCoords a = to_lab(c1);
  ColorCoords b = to_lab(c2);
  double d1 = a.c1 - b.c1, d2 = a.c2 - b.c2, d3 = a.c3 - b.c3;
  return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
}

/// Five ordered colors with the fraction of clustered pixels behind each.
/// Proportions are normalized at construction and must stay within 1e-9 of
/// summing to one.
class ColorTheme {
public:
  static constexpr int kColors = 5;

  ColorTheme(std::array<ColorRGB, 5> colors, std::array<double, 5> proportions,
             std::string source_id = {})
      : colors_(colors), proportions_(proportions), source_id_(std::move(source_id)) {
    double sum = 0.0;
    for (double p : proportions_) {
      if (p < 0.0) throw Error("BadProportion", "theme proportions must be non-negative");
      sum += p;
    }
    if (sum <= 0.0) throw Error("BadProportion", "theme proportions must not all be zero");
    for (double& p : proportions_) p /= sum;
  }

  const std::array<ColorRGB, 5>& colors() const noexcept { return colors_; }
  const std::array<double, 5>& proportions() const noexcept { return proportions_; }
  const std::string& source_id() const noexcept { return source_id_; }

  nlohmann::json to_json() const {
    nlohmann::json colors = nlohmann::json::array();
    for (const auto& c : colors_) colors.push_back({c.r, c.g, c.b});
    return {{"colors", colors},
            {"proportions", proportions_},
            {"source_id", source_id_}};
  }

  static ColorTheme from_json(const nlohmann::json& j) {
    if (!j.contains("colors") || j["colors"].size() != 5)
      throw Error("BadThemeJson", "theme JSON must have exactly 5 colors");
    std::array<ColorRGB, 5> colors;
    for (int i = 0; i < 5; ++i) {
      const auto& c = j["colors"][i];
      colors[i] = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    }
    std::array<double, 5> props{};
    const auto& p = j.at("proportions");
    for (int i = 0; i < 5; ++i) props[i] = p.at(i).get<double>();
    return ColorTheme(colors, props, j.value("source_id", std::string{}));
  }

private:
  std::array<ColorRGB, 5> colors_;
  std::array<double, 5> proportions_;
  std::string source_id_;
};

} // namespace webcolor
